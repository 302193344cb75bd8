"""Cooperative optimizer: bids follow one winning set drawn from the correlated profile of the active bidders."""

import logging
from typing import List, Optional, Tuple

from optimizer.memory import ProfileCache, SolvedMarkets
from optimizer.orchestrator import optimize
from optimizer.schemas.market import BidProfile, Market
from optimizer.schemas.profile import CorrelatedBidProfile

logger = logging.getLogger(__name__)


class CoopOptimizerMechanism:
    """
    Keeps one profile per active set; the optimizer reruns only when the
    active set changes. Members of the drawn winning set bid their LEF bids
    and everyone else bids the reserve. Only the drawn members take part in
    the auction, so reserve bids never displace a recommended winner.
    """

    name = "coop-optimizer"

    def __init__(self, weighting: bool = True, solved: Optional[SolvedMarkets] = None) -> None:
        self.weighting = weighting
        self.cache = ProfileCache()
        self.solved = solved

    def profile_for(self, market: Market, active: List[int]) -> CorrelatedBidProfile:
        profile = self.cache.get(active)
        if profile is None:
            logger.debug("recomputing profile for %d active bidders", len(active))
            run = optimize(market.restrict(active), weighting=self.weighting, solved=self.solved)
            profile = run.mapping.profile
            self.cache.put(active, profile)
        return profile

    def bids(self, market: Market, active: List[int], draw: float) -> Tuple[BidProfile, List[int]]:
        entry = self.profile_for(market, active).sample(draw)
        bids = entry.lef.bid_vector(market)
        participants = [market.position_of(pid) for pid in entry.lef.members]
        return bids, participants
