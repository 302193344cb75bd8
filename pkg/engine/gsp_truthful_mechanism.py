"""Plain GSP: every active bidder bids its maximum willingness-to-pay."""

from typing import List, Tuple

from optimizer.schemas.market import BidProfile, Market


class GspTruthfulMechanism:
    name = "gsp-truthful"

    def bids(self, market: Market, active: List[int], draw: float) -> Tuple[BidProfile, List[int]]:
        bids = [market.reserve] * market.n
        for pos in active:
            bids[pos] = market.valuations[pos]
        return BidProfile(bids=bids), list(active)
