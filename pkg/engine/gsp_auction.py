"""Generalized second price mechanics for one round: allocation, payments, revenue, utilities."""

from typing import List, Optional, Sequence

from optimizer.errors import ContractViolation
from optimizer.schemas.market import AllocationOutcome, BidProfile, Market

# Bids may sit on the strategy-set edge up to float noise.
BOUND_TOL = 1e-12


def rank_bidders(bids: Sequence[float], participants: Sequence[int]) -> List[int]:
    """Positions sorted by bid descending; ties go to the lower position."""
    return sorted(participants, key=lambda i: (-bids[i], i))


def allocate(
    market: Market,
    bids: BidProfile,
    participants: Optional[Sequence[int]] = None,
) -> AllocationOutcome:
    """
    Run GSP. The k highest bids win slots 1..k; slot j pays the bid of the
    slot-(j+1) occupant, the last winner pays the highest losing bid, and the
    reserve backs every price. With fewer participants than slots, the unfilled
    slots have no winner and no payment, and the lowest occupied slot pays the reserve.
    Bids below the reserve do not enter the auction.
    participants restricts the auction to a subset of bidder positions (default: all).
    """
    if len(bids.bids) != market.n:
        raise ContractViolation(f"expected {market.n} bids, got {len(bids.bids)}")
    for i, (b, v) in enumerate(zip(bids.bids, market.valuations)):
        if b > v + BOUND_TOL:
            raise ContractViolation(
                f"bid {b} of bidder {market.ids[i]} exceeds its valuation bound {v}"
            )

    candidates = range(market.n) if participants is None else participants
    pool = [i for i in candidates if bids.bids[i] >= market.reserve - BOUND_TOL]
    order = rank_bidders(bids.bids, pool)
    ids = market.ids

    slot_winner: List[Optional[int]] = []
    payments: List[float] = []
    utility = [0.0] * market.n
    revenue = 0.0
    for j, beta in enumerate(market.ctr):
        if j >= len(order):
            slot_winner.append(None)
            payments.append(0.0)
            continue
        winner = order[j]
        below = bids.bids[order[j + 1]] if j + 1 < len(order) else market.reserve
        price = max(below, market.reserve)
        slot_winner.append(ids[winner])
        payments.append(price)
        utility[winner] = beta * (market.valuations[winner] - price)
        revenue += beta * price

    return AllocationOutcome(
        slot_winner=slot_winner,
        payment_per_click=payments,
        revenue=revenue,
        utility=utility,
    )


def truthful_revenue(market: Market, participants: Optional[Sequence[int]] = None) -> float:
    """Revenue when every participant bids its valuation: Σ_j β_j v_(j+1), reserve-backed."""
    pool = range(market.n) if participants is None else participants
    values = sorted((market.valuations[i] for i in pool), reverse=True)
    total = 0.0
    for j, beta in enumerate(market.ctr):
        if j >= len(values):
            break
        below = values[j + 1] if j + 1 < len(values) else market.reserve
        total += beta * max(below, market.reserve)
    return total
