"""
Cooperative game schemas.

Coalitions are bitmasks over local player indices: bit 0 is the auctioneer,
bit p (p >= 1) is the bidder at market position p - 1. player_ids maps local
indices back to the market's player ids for output.
"""

from typing import Iterable, List, Optional

from pydantic import BaseModel, Field, model_validator

MAX_COALITION_PLAYERS = 21
# Relative slack for identities between bargaining utilities.
POINT_TOL = 1e-9


def coalition_of(members: Iterable[int]) -> int:
    mask = 0
    for p in members:
        if p < 0 or p >= MAX_COALITION_PLAYERS:
            raise ValueError(f"player {p} outside 0..{MAX_COALITION_PLAYERS - 1}")
        mask |= 1 << p
    return mask


def members_of(mask: int) -> List[int]:
    out = []
    p = 0
    while mask:
        if mask & 1:
            out.append(p)
        mask >>= 1
        p += 1
    return out


def has_auctioneer(mask: int) -> bool:
    return bool(mask & 1)


def format_coalition(mask: int, player_ids: Optional[List[int]] = None) -> str:
    """{0,1,2} style label; player_ids relabels local indices."""
    labels = [player_ids[p] if player_ids else p for p in members_of(mask)]
    return "{" + ",".join(str(p) for p in labels) + "}"


class BargainingPoint(BaseModel):
    """
    Auctioneer / aggregated-bidder bargaining point of one coalition.
    The surplus stats (ua_max, ub_truthful, ub_max) are always present;
    ua_star and ub_star are filled in by nbs_solve.
    """

    ua_max: float = Field(..., ge=0, description="Ū_A: truthful GSP revenue of the coalition")
    ub_truthful: float = Field(..., ge=0, description="U_B': aggregated bidder utility at truthful bids")
    ub_max: float = Field(..., ge=0, description="Ū_B: efficient welfare at zero prices")
    ua_star: Optional[float] = Field(default=None, description="U_A*: bargained auctioneer utility")
    ub_star: Optional[float] = Field(default=None, description="U_B*: bargained bidder utility")

    @model_validator(mode="after")
    def validate_point(self) -> "BargainingPoint":
        tol = POINT_TOL * max(1.0, self.ub_max)
        if abs(self.ua_max + self.ub_truthful - self.ub_max) > tol:
            raise ValueError("ua_max + ub_truthful must equal ub_max")
        if self.ua_star is not None:
            if self.ua_star < -tol or self.ua_star > self.ua_max + tol:
                raise ValueError("ua_star must lie in [0, ua_max]")
        if self.ub_star is not None:
            if self.ub_star < self.ub_truthful - tol or self.ub_star > self.ub_max + tol:
                raise ValueError("ub_star must lie in [ub_truthful, ub_max]")
        return self

    @property
    def solved(self) -> bool:
        return self.ua_star is not None and self.ub_star is not None


class CharacteristicGame(BaseModel):
    """
    Characteristic form game over num_players players, values indexed by
    coalition bitmask. Games built from a market have the auctioneer as
    player 0; hand-written games (fixtures) need not.
    """

    num_players: int = Field(..., ge=1, le=MAX_COALITION_PLAYERS)
    values: List[float] = Field(..., description="ν(C) for C = 0 .. 2^num_players - 1")
    player_ids: List[int] = Field(default_factory=list, description="Label per local player index")

    @model_validator(mode="after")
    def validate_game(self) -> "CharacteristicGame":
        if len(self.values) != 1 << self.num_players:
            raise ValueError(
                f"expected {1 << self.num_players} coalition values, got {len(self.values)}"
            )
        if self.values[0] != 0.0:
            raise ValueError("the empty coalition must have value 0")
        if self.player_ids and len(self.player_ids) != self.num_players:
            raise ValueError("player_ids must label every player")
        return self

    @property
    def players(self) -> List[int]:
        return list(range(self.num_players))

    @property
    def grand(self) -> int:
        return (1 << self.num_players) - 1

    @property
    def labels(self) -> List[int]:
        return self.player_ids or self.players

    def value(self, coalition: int) -> float:
        return self.values[coalition]

    def is_monotone(self, tol: float = 1e-9) -> bool:
        """ν(C) <= ν(C ∪ {p}) for every C and p; single-player steps suffice."""
        for mask in range(1 << self.num_players):
            for p in range(self.num_players):
                bit = 1 << p
                if not mask & bit and self.values[mask] > self.values[mask | bit] + tol:
                    return False
        return True

    def is_superadditive(self, tol: float = 1e-9) -> bool:
        """ν(S ∪ T) >= ν(S) + ν(T) for disjoint S, T."""
        full = self.grand
        for s in range(1, full + 1):
            rest = full & ~s
            t = rest
            while t:
                if self.values[s | t] + tol < self.values[s] + self.values[t]:
                    return False
                t = (t - 1) & rest
        return True


class NucleolusStage(BaseModel):
    """Diagnostics of one stage of the staged nucleolus scheme."""

    index: int = Field(..., ge=1)
    epsilon: float = Field(..., description="Optimal maximum excess of the stage")
    fixed: List[int] = Field(default_factory=list, description="Coalitions pinned at this stage")
    rank: int = Field(..., ge=0, description="Rank of the equality system after the stage")
    remaining: int = Field(..., ge=0, description="Unfixed coalitions carried to the next stage")
    lp_solves: int = Field(default=0, ge=0)


class UtilityVector(BaseModel):
    """Allocation x indexed by local player 0..n."""

    x: List[float] = Field(..., min_length=1)
    stages: List[NucleolusStage] = Field(default_factory=list)

    @property
    def total(self) -> float:
        return float(sum(self.x))

    def coalition_sum(self, coalition: int) -> float:
        return float(sum(self.x[p] for p in members_of(coalition)))

    def is_efficient(self, game: CharacteristicGame, tol: float = 1e-7) -> bool:
        return abs(self.total - game.value(game.grand)) <= tol * max(1.0, abs(game.value(game.grand)))
