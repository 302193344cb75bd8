"""Keyword auction schemas: market instance, bid profile, one-round outcome."""

from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Market(BaseModel):
    """
    One keyword auction: n bidders with valuations s̄_i, k slots with CTRs β_j.
    Bidders carry player ids (1..n by default; the auctioneer is player 0).
    """

    model_config = ConfigDict(frozen=True)

    ctr: List[float] = Field(..., min_length=1, description="β_1 >= ... >= β_k, each in (0, 1]")
    valuations: List[float] = Field(..., min_length=1, description="Maximum willingness-to-pay per bidder")
    reserve: float = Field(default=0.0, ge=0, description="Reserve price per click")
    bidder_ids: Optional[List[int]] = Field(
        default=None,
        description="Player id per bidder position; defaults to 1..n",
    )
    allow_thin: bool = Field(
        default=False,
        description="Permit n <= k (sub-markets left after drop-outs, single-bidder games)",
    )

    @model_validator(mode="after")
    def validate_market(self) -> "Market":
        if any(not (0.0 < b <= 1.0) for b in self.ctr):
            raise ValueError("click-through rates must lie in (0, 1]")
        if any(a < b for a, b in zip(self.ctr, self.ctr[1:])):
            raise ValueError("click-through rates must be non-increasing")
        if len(self.ctr) >= len(self.valuations) and not self.allow_thin:
            raise ValueError("k < n required")
        if any(v < self.reserve for v in self.valuations):
            raise ValueError("valuations must be at least the reserve price")
        if self.bidder_ids is not None:
            if len(self.bidder_ids) != len(self.valuations):
                raise ValueError("bidder_ids must have one id per valuation")
            if len(set(self.bidder_ids)) != len(self.bidder_ids) or min(self.bidder_ids) < 1:
                raise ValueError("bidder_ids must be distinct positive player ids")
        return self

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def k(self) -> int:
        return len(self.ctr)

    @property
    def ids(self) -> List[int]:
        return list(self.bidder_ids) if self.bidder_ids is not None else list(range(1, self.n + 1))

    def position_of(self, bidder_id: int) -> int:
        return self.ids.index(bidder_id)

    def restrict(self, positions: Sequence[int]) -> "Market":
        """Sub-market over the given bidder positions, keeping their player ids."""
        ids = self.ids
        return Market(
            ctr=list(self.ctr),
            valuations=[self.valuations[i] for i in positions],
            reserve=self.reserve,
            bidder_ids=[ids[i] for i in positions],
            allow_thin=len(positions) <= self.k,
        )


class BidProfile(BaseModel):
    """One bid per bidder position. Strategy-set bounds are checked against a Market in allocate()."""

    bids: List[float] = Field(..., description="Bid per bidder position")

    @model_validator(mode="after")
    def bids_nonnegative(self) -> "BidProfile":
        if any(b < 0 for b in self.bids):
            raise ValueError("bids must be nonnegative")
        return self


class AllocationOutcome(BaseModel):
    """GSP result for one round. slot_winner holds player ids, None for an unfilled slot."""

    slot_winner: List[Optional[int]] = Field(..., description="Player id per slot 1..k")
    payment_per_click: List[float] = Field(..., description="Price per click per slot")
    revenue: float = Field(..., description="Σ_j β_j · payment_j")
    utility: List[float] = Field(..., description="Utility per bidder position")

    def slot_of(self, bidder_id: int) -> Optional[int]:
        """0-based slot index won by bidder_id, None if it lost."""
        for j, w in enumerate(self.slot_winner):
            if w == bidder_id:
                return j
        return None
