"""In-memory optimizer run history, the per-world profile cache and the per-seed solved sub-markets. Not persistence."""

import time
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from optimizer.schemas.game import CharacteristicGame, UtilityVector
from optimizer.schemas.market import Market
from optimizer.schemas.profile import CorrelatedBidProfile, DeviationReport, MappingResult


class OptimizerRun(BaseModel):
    """One pass of build_game -> compute_nucleolus -> map_to_correlated. Used for inspection only."""

    run_id: str = Field(..., description="Unique run identifier")
    market: Market
    game: CharacteristicGame
    nucleolus: UtilityVector
    mapping: MappingResult
    report: Optional[DeviationReport] = Field(default=None, description="Equilibrium diagnostic, when requested")
    trace: Dict[str, Any] = Field(default_factory=dict)
    timestamp: float = Field(
        default_factory=time.time,
        description="Unix timestamp when the run completed",
    )


OPTIMIZER_HISTORY: Dict[str, OptimizerRun] = {}


class ProfileCache:
    """
    Correlated profiles keyed by active-set bitmask over market positions.
    The optimizer reruns only when a simulation reaches a new active set.
    """

    def __init__(self) -> None:
        self._profiles: Dict[int, CorrelatedBidProfile] = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(active: List[int]) -> int:
        mask = 0
        for pos in active:
            mask |= 1 << pos
        return mask

    def get(self, active: List[int]) -> Optional[CorrelatedBidProfile]:
        profile = self._profiles.get(self.key(active))
        if profile is None:
            self.misses += 1
        else:
            self.hits += 1
        return profile

    def put(self, active: List[int], profile: CorrelatedBidProfile) -> None:
        self._profiles[self.key(active)] = profile

    def __len__(self) -> int:
        return len(self._profiles)


class SolvedMarkets:
    """
    Game and nucleolus per sub-market, keyed by its contents (CTRs, reserve,
    player ids, valuations). Shared by the worlds of one seed, which often
    reach the same active sets; the nucleolus does not depend on weighting.
    """

    def __init__(self) -> None:
        self._solved: Dict[Tuple, Tuple[CharacteristicGame, UtilityVector]] = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(market: Market) -> Tuple:
        return (tuple(market.ctr), market.reserve, tuple(market.ids), tuple(market.valuations))

    def get(self, market: Market) -> Optional[Tuple[CharacteristicGame, UtilityVector]]:
        solved = self._solved.get(self.key(market))
        if solved is None:
            self.misses += 1
        else:
            self.hits += 1
        return solved

    def put(self, market: Market, game: CharacteristicGame, nucleolus: UtilityVector) -> None:
        self._solved[self.key(market)] = (game, nucleolus)

    def __len__(self) -> int:
        return len(self._solved)
