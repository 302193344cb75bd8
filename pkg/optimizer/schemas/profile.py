"""Correlated bid profile schemas: LEF bids per winning set, the profile, the mapping result and the deviation report."""

from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from optimizer.schemas.market import BidProfile, Market

PROBABILITY_TOL = 1e-9


class LefBidProfile(BaseModel):
    """
    Locally envy-free bids for one winning set. members are player ids in
    slot order (valuation descending); bids[j] is the slot-(j+1) bid and
    payments[j] = bids[j+1], with the reserve below the last winner.
    """

    members: List[int] = Field(..., min_length=1, description="Player ids in slot order")
    bids: List[float] = Field(..., description="b_1 >= ... >= b_m")
    payments: List[float] = Field(..., description="Price per click per occupied slot")
    reserve: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def validate_bids(self) -> "LefBidProfile":
        if not (len(self.members) == len(self.bids) == len(self.payments)):
            raise ValueError("members, bids and payments must have equal length")
        if any(a < b - PROBABILITY_TOL for a, b in zip(self.bids, self.bids[1:])):
            raise ValueError("bids must be non-increasing in slot order")
        return self

    def bid_vector(self, market: Market) -> BidProfile:
        """Full bid profile over the market's positions: members bid their LEF bids, everyone else the reserve."""
        bids = [self.reserve] * market.n
        for pid, b in zip(self.members, self.bids):
            bids[market.position_of(pid)] = b
        return BidProfile(bids=bids)


class ProfileEntry(BaseModel):
    """One winning set of the correlated profile."""

    coalition: List[int] = Field(..., description="Winning set as sorted player ids")
    probability: float = Field(..., ge=0, le=1 + PROBABILITY_TOL)
    lef: LefBidProfile


class CorrelatedBidProfile(BaseModel):
    """Distribution over winning sets, each with its recommended bids."""

    entries: List[ProfileEntry] = Field(..., min_length=1)
    expected_utility: Dict[int, float] = Field(default_factory=dict, description="Per player id")
    expected_revenue: float = Field(default=0.0)

    @model_validator(mode="after")
    def validate_distribution(self) -> "CorrelatedBidProfile":
        total = sum(e.probability for e in self.entries)
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        return self

    def sorted_entries(self) -> List[ProfileEntry]:
        """Descending probability, then lexicographic winning set."""
        return sorted(self.entries, key=lambda e: (-e.probability, e.coalition))

    def sample(self, u: float) -> ProfileEntry:
        """Entry selected by a uniform draw u in [0, 1), walking entries in sorted order."""
        ordered = self.sorted_entries()
        cumulative = np.cumsum([e.probability for e in ordered])
        idx = int(np.searchsorted(cumulative, u * cumulative[-1], side="right"))
        return ordered[min(idx, len(ordered) - 1)]


class MappingResult(BaseModel):
    """Correlated profile obtained from a nucleolus vector by the mapping LP."""

    profile: CorrelatedBidProfile
    x: List[float] = Field(..., description="Nucleolus vector over local players 0..n")
    residuals: List[float] = Field(..., description="z_i = |expected payoff_i - x_i| over local players 0..n")
    objective: float = Field(..., description="Mapping objective including the constant valuation term")
    player_ids: List[int] = Field(..., description="Player id per local index (0 is the auctioneer)")
    weighting: bool = Field(default=True)
    lp_variables: int = Field(default=0, ge=0)
    lp_constraints: int = Field(default=0, ge=0)


class EntryDeviation(BaseModel):
    coalition: List[int]
    probability: float
    max_gain: float = Field(..., description="Largest unilateral utility gain over all bidders")
    deviator: Optional[int] = Field(default=None, description="Player id attaining max_gain")
    deviation_bid: Optional[float] = Field(default=None)
    bidder_gains: Dict[int, float] = Field(default_factory=dict, description="Largest gain per player id")


class DeviationReport(BaseModel):
    """Numeric strategic-stability diagnostic of a correlated profile."""

    grid: int = Field(..., ge=10)
    entries: List[EntryDeviation] = Field(default_factory=list)
    max_gain: float = Field(default=0.0)
    expected_gain: float = Field(default=0.0, description="Σ p_C · gain_C")
