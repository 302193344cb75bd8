"""
Locally envy-free bids per winning set, and the LP that maps a nucleolus
vector onto a correlated bid profile over winning sets.
"""

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import List, Sequence, Tuple

import numpy as np

from engine.gsp_auction import BOUND_TOL, allocate
from engine.lp_core import solve_lp
from optimizer.errors import ContractViolation, LpSolverError, SizeLimitError
from optimizer.schemas.game import UtilityVector
from optimizer.schemas.lp import Constraint, LinearProgram
from optimizer.schemas.market import BidProfile, Market
from optimizer.schemas.profile import (
    CorrelatedBidProfile,
    DeviationReport,
    EntryDeviation,
    LefBidProfile,
    MappingResult,
    ProfileEntry,
)

logger = logging.getLogger(__name__)

MAX_MAPPING_BIDDERS = 20
MAX_MAPPING_SLOTS = 10
DROP_PROBABILITY = 1e-12
MIN_GRID = 10


def winning_set_size(market: Market) -> int:
    """k, or every bidder when the market has no more bidders than slots."""
    return min(market.k, market.n)


def lef_bids(market: Market, coalition: Sequence[int]) -> LefBidProfile:
    """
    LEF bids for winning set `coalition` (player ids). Members are ranked by
    valuation (ties by id); the bid below the last winner is the reserve and
    b_j = v_(j) - (β_j / β_(j-1)) (v_(j) - b_(j+1)) going up; the top winner bids its valuation.
    """
    size = winning_set_size(market)
    if len(coalition) != size or len(set(coalition)) != size:
        raise ContractViolation(f"winning set must hold {size} distinct bidders, got {list(coalition)}")
    ranked = sorted(coalition, key=lambda pid: (-market.valuations[market.position_of(pid)], pid))
    values = [market.valuations[market.position_of(pid)] for pid in ranked]
    beta = market.ctr

    bids = [0.0] * (size + 1)
    bids[size] = market.reserve
    for j in range(size - 1, 0, -1):
        bids[j] = values[j] - (beta[j] / beta[j - 1]) * (values[j] - bids[j + 1])
    bids[0] = values[0]

    return LefBidProfile(
        members=ranked,
        bids=bids[:size],
        payments=bids[1:],
        reserve=market.reserve,
    )


@dataclass
class _MappingTerms:
    sets: List[Tuple[int, ...]]
    lefs: List[LefBidProfile]
    utility: np.ndarray  # bidder position x set
    revenue: np.ndarray  # per set


def _mapping_terms(market: Market) -> _MappingTerms:
    size = winning_set_size(market)
    if market.n > MAX_MAPPING_BIDDERS or market.k > MAX_MAPPING_SLOTS:
        raise SizeLimitError(
            f"candidate enumeration supports n <= {MAX_MAPPING_BIDDERS}, k <= {MAX_MAPPING_SLOTS}; "
            f"got n={market.n}, k={market.k}"
        )
    ids = market.ids
    sets = [tuple(ids[i] for i in combo) for combo in itertools.combinations(range(market.n), size)]
    lefs = [lef_bids(market, s) for s in sets]
    utility = np.zeros((market.n, len(sets)))
    revenue = np.zeros(len(sets))
    for c, lef in enumerate(lefs):
        for j, (pid, pay) in enumerate(zip(lef.members, lef.payments)):
            pos = market.position_of(pid)
            utility[pos, c] = market.ctr[j] * (market.valuations[pos] - pay)
            revenue[c] += market.ctr[j] * pay
    return _MappingTerms(sets=sets, lefs=lefs, utility=utility, revenue=revenue)


def _check_dimensions(market: Market, x: UtilityVector) -> None:
    if len(x.x) != market.n + 1:
        raise ContractViolation(f"utility vector has {len(x.x)} entries, market has {market.n + 1} players")


def _build_lp(market: Market, x: UtilityVector, terms: _MappingTerms, weighting: bool) -> LinearProgram:
    n_sets = len(terms.sets)
    n_players = market.n + 1
    n_vars = n_sets + n_players

    def row(set_coeffs: np.ndarray, player: int, z_coeff: float) -> List[float]:
        coeffs = np.zeros(n_vars)
        coeffs[:n_sets] = set_coeffs
        coeffs[n_sets + player] = z_coeff
        return coeffs.tolist()

    constraints: List[Constraint] = []
    payoff_rows = [terms.revenue] + [terms.utility[i] for i in range(market.n)]
    for player, payoff in enumerate(payoff_rows):
        target = x.x[player]
        constraints.append(Constraint(coefficients=row(-payoff, player, 1.0), relation=">=", rhs=-target))
        constraints.append(Constraint(coefficients=row(payoff, player, 1.0), relation=">=", rhs=target))
    normal = np.zeros(n_vars)
    normal[:n_sets] = 1.0
    constraints.append(Constraint(coefficients=normal.tolist(), relation="=", rhs=1.0))

    cost = np.zeros(n_vars)
    cost[n_sets:] = 1.0
    if weighting:
        cost[:n_sets] -= np.asarray(market.valuations) @ terms.utility
    return LinearProgram(sense="minimize", cost=cost.tolist(), constraints=constraints)


def build_mapping_lp(market: Market, x: UtilityVector, weighting: bool = True) -> LinearProgram:
    """
    Mapping LP. Variables: one probability per candidate winning set (in
    combination order of bidder positions), then residuals z_0..z_n.
    Rows: the two residual bounds of the auctioneer, then of each bidder,
    then the normalization. With weighting on, the objective adds
    -Σ_i s̄_i EU_i; the constant Σ_i s̄_i x_i is left out of the cost vector.
    """
    _check_dimensions(market, x)
    return _build_lp(market, x, _mapping_terms(market), weighting)


def map_to_correlated(market: Market, x: UtilityVector, weighting: bool = True) -> MappingResult:
    """Solve the mapping LP and assemble the correlated profile; near-zero probabilities are dropped and the rest renormalized."""
    _check_dimensions(market, x)
    terms = _mapping_terms(market)
    lp = _build_lp(market, x, terms, weighting)
    sol = solve_lp(lp)
    if sol.status != "Optimal":
        raise LpSolverError(f"mapping program is {sol.status}")

    n_sets = len(terms.sets)
    p = np.asarray(sol.primal[:n_sets], dtype=float)
    p[p < DROP_PROBABILITY] = 0.0
    if p.sum() <= 0.0:
        raise LpSolverError("mapping program returned no probability mass")
    p = p / p.sum()

    utility = terms.utility @ p
    revenue = float(terms.revenue @ p)
    payoff = np.concatenate([[revenue], utility])
    target = np.asarray(x.x, dtype=float)
    residuals = np.abs(payoff - target)
    objective = float(residuals.sum())
    if weighting:
        objective += float(np.asarray(market.valuations) @ (target[1:] - utility))

    entries = [
        ProfileEntry(coalition=sorted(terms.sets[c]), probability=float(p[c]), lef=terms.lefs[c])
        for c in np.flatnonzero(p)
    ]
    profile = CorrelatedBidProfile(
        entries=entries,
        expected_utility={pid: float(u) for pid, u in zip(market.ids, utility)},
        expected_revenue=revenue,
    )
    logger.debug(
        "mapping program %dx%d solved in %d pivots, %d sets in support",
        len(lp.constraints), lp.num_variables, sol.iterations, len(entries),
    )
    return MappingResult(
        profile=profile,
        x=list(x.x),
        residuals=residuals.tolist(),
        objective=objective,
        player_ids=[0] + market.ids,
        weighting=weighting,
        lp_variables=lp.num_variables,
        lp_constraints=len(lp.constraints),
    )


def candidate_set_count(market: Market) -> int:
    return comb(market.n, winning_set_size(market))


def _recommended_utility(market: Market, lef: LefBidProfile) -> List[float]:
    utility = [0.0] * market.n
    for j, (pid, pay) in enumerate(zip(lef.members, lef.payments)):
        pos = market.position_of(pid)
        utility[pos] = market.ctr[j] * (market.valuations[pos] - pay)
    return utility


def equilibrium_report(market: Market, profile: CorrelatedBidProfile, grid: int = 50) -> DeviationReport:
    """
    Largest unilateral gain per entry. Each bidder's deviations scan a uniform
    grid over [0, s̄_i] plus its recommended bid; the GSP outcome is recomputed
    with everyone else on the recommendation and compared against the
    recommended utility. As in the simulated auction, only the entry's members
    take part; a deviating outsider joins them, while an outsider on its
    recommended reserve bid stays out and gains nothing.
    """
    if grid < MIN_GRID:
        raise ContractViolation(f"deviation grid needs at least {MIN_GRID} points, got {grid}")

    rows: List[EntryDeviation] = []
    for entry in profile.sorted_entries():
        base_bids = entry.lef.bid_vector(market).bids
        base_utility = _recommended_utility(market, entry.lef)
        members = {market.position_of(pid) for pid in entry.lef.members}
        best_gain, deviator, deviation_bid = -np.inf, None, None
        bidder_gains = {}
        for pos in range(market.n):
            own_best = -np.inf if pos in members else 0.0
            participants = sorted(members | {pos})
            options = np.append(np.linspace(0.0, market.valuations[pos], grid), base_bids[pos])
            for b in options:
                if pos not in members and abs(b - base_bids[pos]) <= BOUND_TOL:
                    continue
                bids = list(base_bids)
                bids[pos] = float(b)
                outcome = allocate(market, BidProfile(bids=bids), participants)
                gain = outcome.utility[pos] - base_utility[pos]
                own_best = max(own_best, gain)
                if gain > best_gain:
                    best_gain, deviator, deviation_bid = gain, market.ids[pos], float(b)
            bidder_gains[market.ids[pos]] = float(own_best)
        rows.append(
            EntryDeviation(
                coalition=entry.coalition,
                probability=entry.probability,
                max_gain=float(best_gain),
                deviator=deviator,
                deviation_bid=deviation_bid,
                bidder_gains=bidder_gains,
            )
        )

    return DeviationReport(
        grid=grid,
        entries=rows,
        max_gain=max(r.max_gain for r in rows),
        expected_gain=float(sum(r.probability * r.max_gain for r in rows)),
    )
