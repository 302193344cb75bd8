"""Nash bargaining between the auctioneer and the aggregated bidder, and the characteristic form game built from it."""

import logging
from functools import lru_cache
from typing import Tuple

import numpy as np

from engine.gsp_auction import truthful_revenue
from optimizer.errors import ContractViolation, SizeLimitError
from optimizer.schemas.game import BargainingPoint, CharacteristicGame, has_auctioneer, members_of
from optimizer.schemas.market import Market

logger = logging.getLogger(__name__)

MAX_GAME_BIDDERS = 20


def _bidder_positions(market: Market, coalition: int) -> list:
    positions = [p - 1 for p in members_of(coalition) if p >= 1]
    if positions and positions[-1] >= market.n:
        raise ContractViolation(f"coalition {coalition:#b} names players beyond the market's {market.n} bidders")
    return positions


def coalition_surplus_stats(market: Market, coalition: int) -> BargainingPoint:
    """
    Surplus stats of a coalition containing the auctioneer: Ū_A (truthful GSP
    revenue among its bidders), U_B' (their aggregated utility at that profile)
    and Ū_B (efficient welfare at zero prices). Slots beyond the coalition's
    bidders stay empty and the last occupied slot is priced at the reserve.
    """
    if not has_auctioneer(coalition):
        raise ContractViolation("coalition has no auctioneer; use characteristic_value")
    positions = _bidder_positions(market, coalition)
    values = sorted((market.valuations[i] for i in positions), reverse=True)
    ub_max = float(sum(beta * v for beta, v in zip(market.ctr, values)))
    ua_max = truthful_revenue(market, positions)
    return BargainingPoint(ua_max=ua_max, ub_truthful=max(ub_max - ua_max, 0.0), ub_max=ub_max)


def nbs_solve(stats: BargainingPoint) -> BargainingPoint:
    """Closed-form Nash bargaining point on the segment (0, Ū_B) – (Ū_A, U_B') with disagreement point (0, 0)."""
    if stats.ua_max <= stats.ub_max / 2:
        ua_star, ub_star = stats.ua_max, stats.ub_truthful
    else:
        ua_star, ub_star = stats.ub_max / 2, stats.ub_max / 2
    return stats.model_copy(update={"ua_star": ua_star, "ub_star": ub_star})


def nash_product(point: BargainingPoint) -> float:
    if not point.solved:
        raise ContractViolation("bargaining point has not been solved")
    return point.ua_star * point.ub_star


def segment_points(stats: BargainingPoint, count: int) -> np.ndarray:
    """count evenly spaced (U_A, U_B) points on the feasible segment, endpoints included."""
    t = np.linspace(0.0, 1.0, count)
    ua = t * stats.ua_max
    ub = stats.ub_max - t * (stats.ub_max - stats.ub_truthful)
    return np.column_stack([ua, ub])


def characteristic_value(market: Market, coalition: int) -> float:
    """ν(C) = U_A* + U_B* when the auctioneer is in C, 0 otherwise."""
    if not has_auctioneer(coalition):
        return 0.0
    if coalition == 1:
        return 0.0
    point = nbs_solve(coalition_surplus_stats(market, coalition))
    return point.ua_star + point.ub_star


@lru_cache(maxsize=65536)
def _worth(ctr: Tuple[float, ...], reserve: float, values: Tuple[float, ...]) -> float:
    sub = Market(ctr=list(ctr), valuations=list(values), reserve=reserve, allow_thin=True)
    return characteristic_value(sub, (1 << (len(values) + 1)) - 1)


def build_game(market: Market) -> CharacteristicGame:
    """
    Characteristic form game over the auctioneer and the market's bidders.
    Worth depends only on the coalition's sorted valuations, so each distinct
    bidder subset is evaluated once.
    """
    if market.n > MAX_GAME_BIDDERS:
        raise SizeLimitError(f"game enumeration supports at most {MAX_GAME_BIDDERS} bidders, got {market.n}")

    ctr = tuple(market.ctr)
    values = [0.0] * (1 << (market.n + 1))
    for bidders in range(1, 1 << market.n):
        sorted_vals = tuple(sorted((market.valuations[i] for i in members_of(bidders)), reverse=True))
        values[(bidders << 1) | 1] = _worth(ctr, market.reserve, sorted_vals)

    logger.debug("built game over %d players (%d coalitions)", market.n + 1, len(values))
    return CharacteristicGame(
        num_players=market.n + 1,
        values=values,
        player_ids=[0] + market.ids,
    )
