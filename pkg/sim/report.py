"""Comparison of the cooperative optimizer against plain GSP over averaged simulation curves."""

from optimizer.errors import ContractViolation
from optimizer.schemas.simulation import ComparisonReport, MetricsTable

COOP = "coop-optimizer"
GSP = "gsp-truthful"
REVENUE_SLACK = 1e-9


def compare_mechanisms(table: MetricsTable) -> ComparisonReport:
    """
    Overtaking round: first round from which the coop cumulative revenue
    curve never falls below the GSP curve again (None if it ends below).
    """
    coop, gsp = table.curve(COOP), table.curve(GSP)
    if not coop or not gsp:
        raise ContractViolation(f"comparison needs both {COOP} and {GSP} curves, got {table.mechanisms}")
    if len(coop) != len(gsp):
        raise ContractViolation("curves must cover the same rounds")

    overtaking = None
    for c, g in zip(reversed(coop), reversed(gsp)):
        if c.mean_cum_revenue + REVENUE_SLACK < g.mean_cum_revenue:
            break
        overtaking = c.round

    final_rev = {COOP: coop[-1].mean_cum_revenue, GSP: gsp[-1].mean_cum_revenue}
    final_active = {COOP: coop[-1].mean_active_bidders, GSP: gsp[-1].mean_active_bidders}
    return ComparisonReport(
        rounds=len(coop),
        seeds=table.seeds,
        config_digest=table.config_digest,
        overtaking_round=overtaking,
        final_cum_revenue=final_rev,
        final_active_bidders=final_active,
        coop_overtakes=final_rev[COOP] > final_rev[GSP],
        coop_retains_no_fewer=final_active[COOP] >= final_active[GSP],
    )
