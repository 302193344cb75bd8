"""Bidding mechanism interface used by the repeated-auction simulator."""

from typing import List, Protocol, Tuple, runtime_checkable

from optimizer.schemas.market import BidProfile, Market

__all__ = ["BiddingMechanism"]


@runtime_checkable
class BiddingMechanism(Protocol):
    """Forms one round of bids for the active bidders of a market."""

    name: str

    def bids(self, market: Market, active: List[int], draw: float) -> Tuple[BidProfile, List[int]]:
        """
        Return bids over every market position and the positions taking part
        in the auction. draw is a uniform number in [0, 1) the mechanism may use.
        """
        ...
