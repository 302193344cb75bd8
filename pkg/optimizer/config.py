"""
Run configuration: one YAML document with a versioned schema.

Sections: market, valuations, bidders, simulation, optimizer, output and an
optional game (hand-written characteristic function, used instead of a market
by the nucleolus and game commands). Unknown keys are rejected everywhere.
"""

import logging
from pathlib import Path
from typing import List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator, model_validator

from optimizer.errors import ConfigError
from optimizer.schemas.game import CharacteristicGame, coalition_of
from optimizer.schemas.market import Market
from optimizer.schemas.simulation import MechanismName, OutcomeDefinition, SimulationConfig

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MarketSection(_Section):
    n: int = Field(default=10, ge=2, le=20, description="Bidders")
    k: int = Field(default=5, ge=1, le=10, description="Slots")
    ctr: Optional[List[float]] = Field(default=None, description="Explicit β_1..β_k; overrides the geometric default")
    ctr_base: float = Field(default=0.9, gt=0, le=1, description="β_1 of the geometric default")
    ctr_decay: float = Field(default=0.8, gt=0, le=1, description="β_(j+1) / β_j of the geometric default")
    reserve: float = Field(default=0.0, ge=0)

    @field_validator("k")
    @classmethod
    def fewer_slots_than_bidders(cls, k: int, info: ValidationInfo) -> int:
        n = info.data.get("n")
        if n is not None and k >= n:
            raise ValueError("k < n required")
        return k

    @field_validator("ctr")
    @classmethod
    def ctr_valid(cls, ctr: Optional[List[float]]) -> Optional[List[float]]:
        if ctr is None:
            return ctr
        if any(not (0.0 < b <= 1.0) for b in ctr):
            raise ValueError("click-through rates must lie in (0, 1]")
        if any(a < b for a, b in zip(ctr, ctr[1:])):
            raise ValueError("click-through rates must be non-increasing")
        return ctr

    @model_validator(mode="after")
    def ctr_matches_slots(self) -> "MarketSection":
        if self.k >= self.n:
            raise ValueError("k < n required")
        if self.ctr is not None and len(self.ctr) != self.k:
            raise ValueError(f"ctr lists {len(self.ctr)} rates for k={self.k} slots")
        return self

    def click_through_rates(self) -> List[float]:
        if self.ctr is not None:
            return list(self.ctr)
        return [self.ctr_base * self.ctr_decay ** j for j in range(self.k)]


class ValuationSection(_Section):
    base: float = Field(default=10.0, gt=0, description="v0: centre of the valuation draw")
    spread: float = Field(default=0.1, ge=0, lt=1, description="δ: draws are uniform on [v0(1-δ), v0(1+δ)]")
    fixed: Optional[List[float]] = Field(default=None, description="Explicit valuations; skips the draw")

    @field_validator("fixed")
    @classmethod
    def fixed_nonnegative(cls, fixed: Optional[List[float]]) -> Optional[List[float]]:
        if fixed is not None and any(v < 0 for v in fixed):
            raise ValueError("valuations must be nonnegative")
        return fixed


class BidderSection(_Section):
    gamma: Union[float, List[float]] = Field(default=0.9, description="Discount factor, shared or per bidder")

    @field_validator("gamma")
    @classmethod
    def gamma_open_interval(cls, gamma: Union[float, List[float]]) -> Union[float, List[float]]:
        values = gamma if isinstance(gamma, list) else [gamma]
        if not values or any(not (0.0 < g < 1.0) for g in values):
            raise ValueError("gamma must lie in the open interval (0, 1)")
        return gamma


class SimulationSection(_Section):
    rounds: int = Field(default=500, ge=1)
    seeds: int = Field(default=200, ge=1)
    master_seed: int = Field(default=0, ge=0, lt=2 ** 64)
    mechanisms: List[MechanismName] = Field(
        default_factory=lambda: ["gsp-truthful", "coop-optimizer"], min_length=1
    )
    outcome: OutcomeDefinition = Field(default="click-sampled")
    dropouts: bool = Field(default=True)
    convergence_tol: Optional[float] = Field(default=None, gt=0, description="Stop once a seed batch moves final mean revenue less than this")
    min_seeds: int = Field(default=20, ge=1)
    batch_size: int = Field(default=20, ge=1)
    workers: int = Field(default=1, ge=1)


class OptimizerSection(_Section):
    weighting: bool = Field(default=True, description="Valuation-weighted term in the mapping objective")
    diagnose_grid: int = Field(default=50, ge=10, description="Deviation grid of the equilibrium report")


class OutputSection(_Section):
    metrics: Optional[str] = Field(default=None, description="Metrics CSV path")
    profile: Optional[str] = Field(default=None, description="Profile YAML path")
    report: Optional[str] = Field(default=None, description="Comparison report YAML path")


class CoalitionValue(_Section):
    members: List[int] = Field(..., min_length=1)
    value: float


class GameSection(_Section):
    """Hand-written game; coalitions not listed are worth 0."""

    players: int = Field(..., ge=2, le=21)
    coalitions: List[CoalitionValue] = Field(default_factory=list)

    @model_validator(mode="after")
    def members_in_range(self) -> "GameSection":
        for c in self.coalitions:
            if any(p < 0 or p >= self.players for p in c.members):
                raise ValueError(f"coalition {c.members} names players outside 0..{self.players - 1}")
        return self

    def to_game(self) -> CharacteristicGame:
        values = [0.0] * (1 << self.players)
        for c in self.coalitions:
            values[coalition_of(c.members)] = c.value
        return CharacteristicGame(num_players=self.players, values=values)


class RunConfig(_Section):
    schema_version: Literal[1] = Field(default=SCHEMA_VERSION)
    market: MarketSection = Field(default_factory=MarketSection)
    valuations: ValuationSection = Field(default_factory=ValuationSection)
    bidders: BidderSection = Field(default_factory=BidderSection)
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    optimizer: OptimizerSection = Field(default_factory=OptimizerSection)
    output: OutputSection = Field(default_factory=OutputSection)
    game: Optional[GameSection] = Field(default=None)

    def gammas(self) -> List[float]:
        g = self.bidders.gamma
        return list(g) if isinstance(g, list) else [g] * self.market.n

    def build_market(self, valuations: List[float]) -> Market:
        return Market(
            ctr=self.market.click_through_rates(),
            valuations=list(valuations),
            reserve=self.market.reserve,
        )

    def simulation_config(self) -> SimulationConfig:
        sim = self.simulation
        return SimulationConfig(
            ctr=self.market.click_through_rates(),
            n=self.market.n,
            reserve=self.market.reserve,
            base_value=self.valuations.base,
            spread=self.valuations.spread,
            fixed_valuations=self.valuations.fixed,
            gamma=self.gammas(),
            rounds=sim.rounds,
            seeds=sim.seeds,
            mechanisms=list(sim.mechanisms),
            outcome=sim.outcome,
            master_seed=sim.master_seed,
            dropouts=sim.dropouts,
            weighting=self.optimizer.weighting,
            convergence_tol=sim.convergence_tol,
            min_seeds=sim.min_seeds,
            batch_size=sim.batch_size,
            workers=sim.workers,
        )

    def with_overrides(
        self,
        seed: Optional[int] = None,
        rounds: Optional[int] = None,
        mechanism: Optional[str] = None,
    ) -> "RunConfig":
        """Apply command-line overrides and re-validate."""
        data = self.model_dump()
        if seed is not None:
            data["simulation"]["master_seed"] = seed
        if rounds is not None:
            data["simulation"]["rounds"] = rounds
        if mechanism is not None:
            data["simulation"]["mechanisms"] = [mechanism]
        return _validate(data)


def _check_consistency(config: RunConfig) -> None:
    n = config.market.n
    fixed = config.valuations.fixed
    if fixed is not None:
        if len(fixed) != n:
            raise ConfigError(f"lists {len(fixed)} valuations for n={n} bidders", key="valuations.fixed")
        if any(v < config.market.reserve for v in fixed):
            raise ConfigError("valuations must be at least the reserve price", key="valuations.fixed")
    elif config.valuations.base * (1 - config.valuations.spread) < config.market.reserve:
        raise ConfigError("lowest valuation draw falls below the reserve price", key="valuations.spread")
    gamma = config.bidders.gamma
    if isinstance(gamma, list) and len(gamma) != n:
        raise ConfigError(f"lists {len(gamma)} discount factors for n={n} bidders", key="bidders.gamma")


def _validate(data: dict) -> RunConfig:
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        err = e.errors()[0]
        key = ".".join(str(p) for p in err["loc"]) or None
        if err["type"] == "extra_forbidden":
            message = "unknown key"
        else:
            message = err["msg"].removeprefix("Value error, ")
        raise ConfigError(message, key=key) from e
    _check_consistency(config)
    return config


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML configuration document. An empty document yields the defaults."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML: {e}") from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping at the top level")
    config = _validate(data)
    logger.debug("parsed configuration (n=%d, k=%d)", config.market.n, config.market.k)
    return config


def dump_config(config: RunConfig) -> str:
    """Canonical YAML text; parse_config(dump_config(c)) == c."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False, default_flow_style=False)


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    return parse_config(text)
