"""
Nucleolus of a characteristic form game.

Staged scheme: each stage minimizes the largest excess ε over the coalitions
not yet fixed, subject to efficiency and the equalities pinned by earlier
stages. A coalition is fixed at the stage bound only if it is tight in every
optimal solution of the stage. Coalitions whose indicator vector falls in the
span of the pinned equalities have constant excess and leave the problem.
The scheme stops once the equalities determine x.

Every stage program has one row per coalition and only num_players + 1
variables, so it is solved through its LP dual (num_players + 1 rows, one
column per coalition); the primal point is read off the dual multipliers.
"""

import itertools
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from engine.lp_core import solve_lp
from optimizer.errors import ContractViolation, NucleolusError, SizeLimitError
from optimizer.schemas.game import CharacteristicGame, NucleolusStage, UtilityVector
from optimizer.schemas.lp import FREE, NONNEGATIVE, Constraint, LinearProgram

logger = logging.getLogger(__name__)

TIGHT_TOL = 1e-7
SPAN_TOL = 1e-8
BRUTE_FORCE_MAX_PLAYERS = 4
ESSENTIAL_TOL = 1e-12


def _indicators(num_players: int, masks: np.ndarray) -> np.ndarray:
    return ((masks[:, None] >> np.arange(num_players)) & 1).astype(float)


def _proper_coalitions(game: CharacteristicGame) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    masks = np.arange(1, game.grand, dtype=np.int64)
    values = np.asarray(game.values, dtype=float)[masks]
    return masks, _indicators(game.num_players, masks), values


def essential_coalitions(game: CharacteristicGame) -> List[int]:
    """
    Proper coalitions that cannot be split as C = (C - {p}) + {p} without
    losing worth, i.e. ν(C) > ν(C - {p}) + ν({p}) for every member p.
    Singletons are always kept. When the core is nonempty the excesses of
    the dropped coalitions never exceed those of their parts, so this family
    alone determines the nucleolus.
    """
    masks = np.arange(1, game.grand, dtype=np.int64)
    values = np.asarray(game.values, dtype=float)
    tol = ESSENTIAL_TOL * max(1.0, float(np.abs(values).max()))
    splittable = np.zeros(masks.size, dtype=bool)
    for p in range(game.num_players):
        bit = 1 << p
        has = (masks & bit) != 0
        rest = masks ^ bit
        splittable |= has & (rest != 0) & (values[masks] <= values[rest] + values[bit] + tol)
    return [int(c) for c in masks[~splittable]]


def _coalition_family(game: CharacteristicGame, coalitions: Sequence[int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    masks = np.unique(np.asarray(coalitions, dtype=np.int64))
    if masks.size == 0 or masks[0] < 1 or masks[-1] >= game.grand:
        raise ContractViolation("coalition family must hold proper nonempty coalitions only")
    if not all(np.isin(1 << np.arange(game.num_players), masks)):
        raise ContractViolation("coalition family must contain every singleton")
    values = np.asarray(game.values, dtype=float)[masks]
    return masks, _indicators(game.num_players, masks), values


def excess_vector(game: CharacteristicGame, x: UtilityVector) -> List[float]:
    """Excesses ν(C) - x(C) over proper nonempty coalitions, largest first."""
    _, ind, values = _proper_coalitions(game)
    excess = values - ind @ np.asarray(x.x, dtype=float)
    return sorted(excess.tolist(), reverse=True)


def core_check(game: CharacteristicGame, x: UtilityVector) -> float:
    """Largest coalition excess ν(C) - x(C) over nonempty coalitions; <= tolerance means x is in the core."""
    if len(x.x) != game.num_players:
        raise ContractViolation(f"allocation has {len(x.x)} entries for {game.num_players} players")
    masks = np.arange(1, game.grand + 1, dtype=np.int64)
    ind = _indicators(game.num_players, masks)
    excess = np.asarray(game.values, dtype=float)[masks] - ind @ np.asarray(x.x, dtype=float)
    return float(excess.max())


def _row_space(E: np.ndarray) -> np.ndarray:
    _, s, vt = np.linalg.svd(E, full_matrices=False)
    if s.size == 0:
        return np.zeros((0, E.shape[1]))
    rank = int((s > SPAN_TOL * max(1.0, s[0])).sum())
    return vt[:rank]


def _outside_span(basis: np.ndarray, ind: np.ndarray) -> np.ndarray:
    if basis.shape[0] == 0:
        return np.ones(ind.shape[0], dtype=bool)
    residual = ind - (ind @ basis.T) @ basis
    return np.linalg.norm(residual, axis=1) > SPAN_TOL


def _face_program(
    E: np.ndarray,
    f: np.ndarray,
    ind: np.ndarray,
    rhs: np.ndarray,
    target: np.ndarray,
    with_epsilon: bool,
) -> LinearProgram:
    """
    Dual of  min target·(x[, ε])  s.t.  E x = f,  x(C) [+ ε] >= rhs_C.
    Columns: one free multiplier per equality, one nonnegative multiplier per coalition.
    Rows: one per player, plus the ε row when with_epsilon.
    """
    n_eq, n_players = E.shape
    rows = np.hstack([E.T, ind.T])
    if with_epsilon:
        rows = np.vstack([rows, np.concatenate([np.zeros(n_eq), np.ones(ind.shape[0])])])
    constraints = [
        Constraint(coefficients=row.tolist(), relation="=", rhs=float(t))
        for row, t in zip(rows, target)
    ]
    return LinearProgram(
        sense="maximize",
        cost=np.concatenate([f, rhs]).tolist(),
        constraints=constraints,
        bounds=[FREE] * n_eq + [NONNEGATIVE] * ind.shape[0],
    )


def _solve_face(
    E: np.ndarray,
    f: np.ndarray,
    ind: np.ndarray,
    rhs: np.ndarray,
    target: np.ndarray,
    with_epsilon: bool,
    stages: List[dict],
) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (primal point from the duals, coalition multipliers)."""
    lp = _face_program(E, f, ind, rhs, target, with_epsilon)
    sol = solve_lp(lp)
    if sol.status != "Optimal":
        raise NucleolusError(f"stage program is {sol.status}", stages=stages)
    point = np.asarray(sol.duals, dtype=float)
    multipliers = np.asarray(sol.primal[E.shape[0]:], dtype=float)
    return point, multipliers


def compute_nucleolus(game: CharacteristicGame, coalitions: Optional[Sequence[int]] = None) -> UtilityVector:
    """
    Nucleolus by the staged LP scheme. The returned vector carries per-stage
    diagnostics. coalitions restricts the excess scan to a family of proper
    coalitions that determines the nucleolus, such as essential_coalitions()
    of a game with a nonempty core; every singleton must be in it. Raises
    NucleolusError when a stage program fails or the equalities do not pin x
    within num_players stages.
    """
    m = game.num_players
    if m < 2:
        raise ContractViolation("nucleolus needs at least two players")

    if coalitions is None:
        masks, ind_all, values_all = _proper_coalitions(game)
    else:
        masks, ind_all, values_all = _coalition_family(game, coalitions)
    scale = max(1.0, float(np.abs(game.values).max()))
    tol = TIGHT_TOL * scale

    E = np.ones((1, m))
    f = np.array([game.value(game.grand)])
    open_idx = np.arange(masks.size)
    stages: List[NucleolusStage] = []
    raw_stages: List[dict] = []
    rank = 1

    while rank < m:
        if len(stages) >= m:
            raise NucleolusError(
                f"equalities did not pin the allocation after {len(stages)} stages",
                stages=raw_stages,
            )
        if open_idx.size == 0:
            raise NucleolusError("no open coalitions left before the allocation was pinned", stages=raw_stages)

        ind = ind_all[open_idx]
        vals = values_all[open_idx]
        target = np.zeros(m + 1)
        target[-1] = 1.0
        point, mu = _solve_face(E, f, ind, vals, target, True, raw_stages)
        x_star, eps = point[:m], float(point[m])
        solves = 1

        always_tight = mu > tol
        slack = ind @ x_star + eps - vals
        candidates = ~always_tight & (slack <= tol)

        # Maximize the summed slack of the candidates over the optimal face;
        # whatever reaches positive slack is released, the rest are tight everywhere.
        while candidates.any():
            weight = ind[candidates].sum(axis=0)
            x_face, _ = _solve_face(E, f, ind, vals - eps, -weight, False, raw_stages)
            solves += 1
            face_slack = ind @ x_face + eps - vals
            released = candidates & (face_slack > tol)
            if not released.any():
                break
            candidates &= ~released

        fixed_local = always_tight | candidates
        if not fixed_local.any():
            raise NucleolusError("stage fixed no coalition", stages=raw_stages)

        fixed_idx = open_idx[fixed_local]
        E = np.vstack([E, ind_all[fixed_idx]])
        f = np.concatenate([f, values_all[fixed_idx] - eps])
        basis = _row_space(E)
        rank = basis.shape[0]
        remaining = open_idx[~fixed_local]
        open_idx = remaining[_outside_span(basis, ind_all[remaining])]

        stage = NucleolusStage(
            index=len(stages) + 1,
            epsilon=eps,
            fixed=[int(c) for c in masks[fixed_idx]],
            rank=rank,
            remaining=int(open_idx.size),
            lp_solves=solves,
        )
        stages.append(stage)
        raw_stages.append(stage.model_dump())
        logger.debug(
            "stage %d: epsilon=%.9g, fixed %d coalitions, rank %d/%d, %d open",
            stage.index, eps, len(stage.fixed), rank, m, stage.remaining,
        )

    x, *_ = np.linalg.lstsq(E, f, rcond=None)
    return UtilityVector(x=[float(v) for v in x], stages=stages)


def _lexicographic_argmin(rows: np.ndarray, tol: float) -> int:
    alive = np.arange(rows.shape[0])
    for col in range(rows.shape[1]):
        column = rows[alive, col]
        alive = alive[column <= column.min() + tol]
        if alive.size == 1:
            break
    return int(alive[0])


def brute_force_nucleolus(game: CharacteristicGame) -> UtilityVector:
    """
    Nucleolus by enumeration, for at most four players. The nucleolus solves
    efficiency plus num_players - 1 independent equal-excess equations
    e(C) = e(C'), so every nonsingular such system is solved and the candidate
    with the lexicographically smallest sorted excess vector wins.
    """
    m = game.num_players
    if m > BRUTE_FORCE_MAX_PLAYERS:
        raise SizeLimitError(f"brute-force nucleolus supports at most {BRUTE_FORCE_MAX_PLAYERS} players, got {m}")
    if m < 2:
        raise ContractViolation("nucleolus needs at least two players")

    _, ind, values = _proper_coalitions(game)
    pairs = list(itertools.combinations(range(ind.shape[0]), 2))
    diff_rows = np.array([ind[a] - ind[b] for a, b in pairs])
    diff_rhs = np.array([values[a] - values[b] for a, b in pairs])

    choice = np.array(list(itertools.combinations(range(len(pairs)), m - 1)))
    A = np.concatenate([np.ones((choice.shape[0], 1, m)), diff_rows[choice]], axis=1)
    b = np.concatenate(
        [np.full((choice.shape[0], 1), game.value(game.grand)), diff_rhs[choice]], axis=1
    )
    regular = np.abs(np.linalg.det(A)) > 1e-9
    candidates = np.linalg.solve(A[regular], b[regular][..., None])[..., 0]

    excess = values[None, :] - candidates @ ind.T
    ranked = -np.sort(-excess, axis=1)
    scale = max(1.0, float(np.abs(game.values).max()))
    best = _lexicographic_argmin(ranked, 1e-9 * scale)
    return UtilityVector(x=[float(v) for v in candidates[best]])
