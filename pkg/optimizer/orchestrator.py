"""Orchestrator: runs the cooperative optimizer pipeline and records a trace of its phases."""

import logging
import time
import uuid
from typing import Any, Dict, List, Optional

from engine.bargaining import build_game
from engine.lef_mapping import candidate_set_count, equilibrium_report, map_to_correlated
from engine.nucleolus import compute_nucleolus, core_check, essential_coalitions
from optimizer.errors import BidOptimizerError
from optimizer.memory import OPTIMIZER_HISTORY, OptimizerRun, SolvedMarkets
from optimizer.schemas.game import CharacteristicGame, UtilityVector
from optimizer.schemas.market import Market

logger = logging.getLogger(__name__)

CORE_TOL = 1e-7


def market_nucleolus(game: CharacteristicGame) -> UtilityVector:
    """
    Nucleolus of a market game over its essential coalitions. The auctioneer
    is a veto player, so the core is nonempty; a result outside the core
    falls back to the full coalition scan.
    """
    family = essential_coalitions(game)
    nucleolus = compute_nucleolus(game, family)
    scale = max(1.0, max(abs(v) for v in game.values))
    if core_check(game, nucleolus) > CORE_TOL * scale:
        logger.warning("essential-coalition nucleolus left the core; rescanning all coalitions")
        nucleolus = compute_nucleolus(game)
    return nucleolus


def optimize(
    market: Market,
    weighting: bool = True,
    diagnose_grid: Optional[int] = None,
    record: bool = False,
    solved: Optional[SolvedMarkets] = None,
) -> OptimizerRun:
    """
    build_game -> compute_nucleolus -> map_to_correlated, plus the
    equilibrium report when diagnose_grid is set. Failures are logged with
    the phases reached and re-raised. record=True keeps the run in
    OPTIMIZER_HISTORY. solved, when given, supplies and collects the game
    and nucleolus of markets seen before.
    """
    phases: List[str] = []
    trace: Dict[str, Any] = {
        "phases": phases,
        "bidders": market.n,
        "slots": market.k,
        "weighting": weighting,
    }
    started = time.perf_counter()

    try:
        cached = solved.get(market) if solved is not None else None
        trace["nucleolus_cached"] = cached is not None
        if cached is None:
            game = build_game(market)
            phases.append("game_built")
            nucleolus = market_nucleolus(game)
            phases.append("nucleolus_computed")
            if solved is not None:
                solved.put(market, game, nucleolus)
        else:
            game, nucleolus = cached
            phases.extend(["game_built", "nucleolus_computed"])
        trace["coalitions"] = len(game.values)
        trace["nucleolus_stages"] = [s.model_dump() for s in nucleolus.stages]
        trace["core_violation"] = core_check(game, nucleolus)

        mapping = map_to_correlated(market, nucleolus, weighting=weighting)
        phases.append("profile_mapped")
        trace["candidate_sets"] = candidate_set_count(market)
        trace["lp_size"] = {"variables": mapping.lp_variables, "constraints": mapping.lp_constraints}
        trace["support"] = len(mapping.profile.entries)

        report = None
        if diagnose_grid is not None:
            report = equilibrium_report(market, mapping.profile, grid=diagnose_grid)
            phases.append("equilibrium_reported")
    except BidOptimizerError:
        logger.warning("optimizer failed after phases %s", phases or ["none"])
        raise

    trace["elapsed_s"] = time.perf_counter() - started
    run = OptimizerRun(
        run_id=uuid.uuid4().hex,
        market=market,
        game=game,
        nucleolus=nucleolus,
        mapping=mapping,
        report=report,
        trace=trace,
    )
    if record:
        OPTIMIZER_HISTORY[run.run_id] = run
    logger.debug("optimizer run %s: %s", run.run_id, ", ".join(phases))
    return run
