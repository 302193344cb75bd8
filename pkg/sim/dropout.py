"""Discounted engagement model: a bidder stays with probability equal to its discounted click ratio."""

from optimizer.errors import ContractViolation
from optimizer.schemas.simulation import BidderState


def dropout_probability(state: BidderState) -> float:
    """
    Probability that the bidder stays for the next round:
    Σ γ^i x_{-i} / Σ γ^i = num / (γ / (1 - γ)), clipped to [0, 1].
    """
    if not state.active:
        raise ContractViolation(f"bidder {state.id} has already dropped out")
    return min(1.0, max(0.0, state.num / state.saturation))


def record_outcome(state: BidderState, clicked: int) -> BidderState:
    """Shift the history by one round: num' = γ (clicked + num). A saturated history stays saturated under a click."""
    if not state.active:
        raise ContractViolation(f"bidder {state.id} has already dropped out")
    if clicked not in (0, 1):
        raise ContractViolation(f"outcome must be 0 or 1, got {clicked}")
    if clicked and state.num >= state.saturation:
        num = state.saturation
    else:
        num = min(state.gamma * (clicked + state.num), state.saturation)
    return state.model_copy(update={"num": num})
