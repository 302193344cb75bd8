"""
Random streams of a simulation, all derived from the master seed.

Valuations:      SeedSequence([master, seed_index, 0]), one draw of n uniforms per seed,
                 shared by every mechanism of that seed.
Round streams:   SeedSequence([master, seed_index, mechanism_code, purpose]) with
                 purpose 1 = clicks (k uniforms per round, one per slot),
                 2 = stays (n uniforms per round, one per bidder position),
                 3 = winning-set draw (one uniform per round).
Every round consumes the same number of draws from each stream whatever happens
in it, so draw r * n + i of the stay stream always belongs to bidder i in round r.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

MECHANISM_CODES = {"gsp-truthful": 1, "coop-optimizer": 2}
VALUATION_STREAM = 0
CLICK_STREAM = 1
STAY_STREAM = 2
ENTRY_STREAM = 3


def _generator(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(key)))


def draw_valuations(
    master_seed: int,
    seed_index: int,
    n: int,
    base: float,
    spread: float,
    fixed: Optional[List[float]] = None,
) -> List[float]:
    """Uniform on [base(1 - spread), base(1 + spread)], or the fixed list when given."""
    if fixed is not None:
        return list(fixed)
    rng = _generator(master_seed, seed_index, VALUATION_STREAM)
    return rng.uniform(base * (1 - spread), base * (1 + spread), size=n).tolist()


@dataclass
class RoundDraws:
    clicks: np.ndarray
    stays: np.ndarray
    entry: float


class RoundStreams:
    """Per (seed, mechanism) streams; draw() hands out one round's worth."""

    def __init__(self, master_seed: int, seed_index: int, mechanism: str) -> None:
        code = MECHANISM_CODES[mechanism]
        self._clicks = _generator(master_seed, seed_index, code, CLICK_STREAM)
        self._stays = _generator(master_seed, seed_index, code, STAY_STREAM)
        self._entry = _generator(master_seed, seed_index, code, ENTRY_STREAM)

    def draw(self, n: int, k: int) -> RoundDraws:
        return RoundDraws(
            clicks=self._clicks.random(k),
            stays=self._stays.random(n),
            entry=float(self._entry.random()),
        )
