"""Repeated-auction simulation schemas: bidder engagement state, run settings, per-round records and averaged metrics."""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

MechanismName = Literal["gsp-truthful", "coop-optimizer"]
OutcomeDefinition = Literal["click-sampled", "slot-allocated"]

ENGAGEMENT_TOL = 1e-12


class BidderState(BaseModel):
    """
    Engagement of one bidder. num holds Σ_{i>=1} γ^i x_{-i} over the click
    history, updated incrementally; γ/(1-γ) is its saturated value.
    """

    id: int = Field(..., ge=1)
    valuation: float = Field(..., ge=0)
    gamma: float = Field(..., gt=0, lt=1)
    num: float = Field(..., ge=0)
    active: bool = Field(default=True)

    @model_validator(mode="after")
    def num_within_saturation(self) -> "BidderState":
        if self.num > self.saturation * (1 + ENGAGEMENT_TOL):
            raise ValueError(f"engagement {self.num} exceeds saturation {self.saturation}")
        return self

    @property
    def saturation(self) -> float:
        return self.gamma / (1.0 - self.gamma)

    @classmethod
    def fresh(cls, bidder_id: int, valuation: float, gamma: float) -> "BidderState":
        """A new bidder with an all-click pre-history."""
        state = cls(id=bidder_id, valuation=valuation, gamma=gamma, num=0.0)
        return state.model_copy(update={"num": state.saturation})


class SimulationConfig(BaseModel):
    """Resolved settings of one simulation run (built from a RunConfig)."""

    ctr: List[float] = Field(..., min_length=1)
    n: int = Field(..., ge=2)
    reserve: float = Field(default=0.0, ge=0)
    base_value: float = Field(default=10.0, gt=0)
    spread: float = Field(default=0.1, ge=0, lt=1)
    fixed_valuations: Optional[List[float]] = Field(default=None)
    gamma: List[float] = Field(..., min_length=1, description="γ per bidder position")
    rounds: int = Field(default=500, ge=1)
    seeds: int = Field(default=200, ge=1)
    mechanisms: List[MechanismName] = Field(default_factory=lambda: ["gsp-truthful", "coop-optimizer"])
    outcome: OutcomeDefinition = Field(default="click-sampled")
    master_seed: int = Field(default=0, ge=0)
    dropouts: bool = Field(default=True)
    weighting: bool = Field(default=True)
    convergence_tol: Optional[float] = Field(default=None, gt=0)
    min_seeds: int = Field(default=20, ge=1)
    batch_size: int = Field(default=20, ge=1)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def validate_shapes(self) -> "SimulationConfig":
        if len(self.ctr) >= self.n:
            raise ValueError("k < n required")
        if len(self.gamma) != self.n:
            raise ValueError("gamma must list one discount factor per bidder")
        if any(not (0.0 < g < 1.0) for g in self.gamma):
            raise ValueError("discount factors must lie in (0, 1)")
        if self.fixed_valuations is not None and len(self.fixed_valuations) != self.n:
            raise ValueError("fixed_valuations must list one valuation per bidder")
        if not self.mechanisms:
            raise ValueError("at least one mechanism is required")
        return self

    @property
    def k(self) -> int:
        return len(self.ctr)


class RoundRecord(BaseModel):
    round: int = Field(..., ge=1)
    revenue: float = Field(..., ge=0, description="Σ_j β_j · payment_j of the round")
    cumulative_revenue: float = Field(..., ge=0)
    active_count: int = Field(..., ge=0, description="Bidders still active after the round's drop-outs")
    clicked: List[int] = Field(default_factory=list, description="Outcome per bidder position (0/1)")


class MetricsRow(BaseModel):
    round: int = Field(..., ge=1)
    mechanism: MechanismName
    mean_cum_revenue: float
    mean_active_bidders: float
    mean_round_revenue: float


class MetricsTable(BaseModel):
    """Per-round means across seeds, one row per (mechanism, round), sorted that way."""

    rows: List[MetricsRow] = Field(default_factory=list)
    config_digest: str = Field(default="")
    seeds: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def rows_in_order(self) -> "MetricsTable":
        keys = [(r.mechanism, r.round) for r in self.rows]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise ValueError("rows must be unique and sorted by (mechanism, round)")
        return self

    def curve(self, mechanism: str) -> List[MetricsRow]:
        return [r for r in self.rows if r.mechanism == mechanism]

    @property
    def mechanisms(self) -> List[str]:
        return list(dict.fromkeys(r.mechanism for r in self.rows))


class ComparisonReport(BaseModel):
    """Cooperative optimizer vs plain GSP over the averaged curves."""

    rounds: int = Field(..., ge=0)
    seeds: int = Field(..., ge=0)
    config_digest: str = Field(default="")
    overtaking_round: Optional[int] = Field(
        default=None,
        description="First round from which coop cumulative revenue stays >= GSP",
    )
    final_cum_revenue: Dict[str, float] = Field(default_factory=dict)
    final_active_bidders: Dict[str, float] = Field(default_factory=dict)
    coop_overtakes: bool = Field(default=False, description="Coop ends with strictly higher cumulative revenue")
    coop_retains_no_fewer: bool = Field(default=False, description="Coop ends with at least as many active bidders")
