"""
Dense two-phase simplex on the standard-form reformulation.

Variables are shifted/split so that every structural column is nonnegative,
bound rows are appended for finite upper bounds, slack/surplus columns are
added per inequality and artificial columns per >= / = row that has no slack
to start from. Entering column: most negative reduced cost (lowest index on
ties), switching to Bland's rule after BLAND_SWITCH consecutive pivots that
do not improve the objective. Leaving row: minimum ratio, ties broken by the
lowest basic column index.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from optimizer.errors import LpSolverError, MalformedProgramError
from optimizer.schemas.lp import LinearProgram, LpSolution

logger = logging.getLogger(__name__)

TOL = 1e-9
BLAND_SWITCH = 1000
MAX_PIVOTS = 50_000


@dataclass
class _StandardForm:
    """min c·x' s.t. A x' (rel) b, x' >= 0, with x = shift + Σ sign·x'."""

    A: np.ndarray
    b: np.ndarray
    relations: List[str]
    c: np.ndarray
    # Per original variable: (shift, [(std_column, sign), ...])
    recover: List[Tuple[float, List[Tuple[int, float]]]] = field(default_factory=list)
    original_rows: int = 0


def _to_standard_form(lp: LinearProgram) -> _StandardForm:
    n = lp.num_variables
    m = len(lp.constraints)
    A = np.array([row.coefficients for row in lp.constraints], dtype=float).reshape(m, n)
    b = np.array([row.rhs for row in lp.constraints], dtype=float)
    relations = [row.relation for row in lp.constraints]
    cost = np.asarray(lp.cost, dtype=float)
    if lp.sense == "maximize":
        cost = -cost

    columns: List[np.ndarray] = []
    costs: List[float] = []
    recover: List[Tuple[float, List[Tuple[int, float]]]] = []
    bound_rows: List[Tuple[int, float]] = []

    for j, bound in enumerate(lp.variable_bounds()):
        lo, hi = bound.lower, bound.upper
        if math.isfinite(lo):
            b = b - A[:, j] * lo
            columns.append(A[:, j])
            costs.append(cost[j])
            recover.append((lo, [(len(columns) - 1, 1.0)]))
            if math.isfinite(hi):
                bound_rows.append((len(columns) - 1, hi - lo))
        elif math.isfinite(hi):
            b = b - A[:, j] * hi
            columns.append(-A[:, j])
            costs.append(-cost[j])
            recover.append((hi, [(len(columns) - 1, -1.0)]))
        else:
            columns.append(A[:, j])
            costs.append(cost[j])
            columns.append(-A[:, j])
            costs.append(-cost[j])
            recover.append((0.0, [(len(columns) - 2, 1.0), (len(columns) - 1, -1.0)]))

    n_std = len(columns)
    A_std = np.column_stack(columns) if columns else np.zeros((m, 0))
    A_std = A_std.reshape(m, n_std)
    if bound_rows:
        extra = np.zeros((len(bound_rows), n_std))
        for r, (col, _) in enumerate(bound_rows):
            extra[r, col] = 1.0
        A_std = np.vstack([A_std, extra])
        b = np.concatenate([b, [ub for _, ub in bound_rows]])
        relations = relations + ["<="] * len(bound_rows)

    return _StandardForm(
        A=A_std,
        b=b,
        relations=relations,
        c=np.asarray(costs, dtype=float),
        recover=recover,
        original_rows=m,
    )


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row, :] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row, :])


def _simplex(
    T: np.ndarray,
    basis: List[int],
    ncols: int,
    tol: float,
    pivots_so_far: int,
) -> Tuple[str, int]:
    """Minimize over the tableau in place. Returns (status, pivots)."""
    m = T.shape[0] - 1
    pivots = pivots_so_far
    stalled = 0
    bland = False
    while True:
        reduced = T[-1, :ncols]
        if bland:
            candidates = np.flatnonzero(reduced < -tol)
            if candidates.size == 0:
                return "optimal", pivots
            col = int(candidates[0])
        else:
            col = int(np.argmin(reduced))
            if reduced[col] >= -tol:
                return "optimal", pivots

        column = T[:m, col]
        positive = column > tol
        if not positive.any():
            return "unbounded", pivots
        rhs = np.maximum(T[:m, -1], 0.0)
        ratios = np.full(m, np.inf)
        ratios[positive] = rhs[positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol)
        row = int(min(ties, key=lambda r: basis[r]))

        before = T[-1, -1]
        _pivot(T, row, col)
        basis[row] = col
        pivots += 1

        if T[-1, -1] > before + tol:
            stalled = 0
        else:
            stalled += 1
            if stalled >= BLAND_SWITCH and not bland:
                logger.debug("switching to Bland's rule after %d stalled pivots", stalled)
                bland = True
        if pivots > MAX_PIVOTS:
            raise LpSolverError(f"simplex exceeded {MAX_PIVOTS} pivots")


def solve_lp(lp: LinearProgram) -> LpSolution:
    """
    Solve lp with the two-phase dense simplex.
    Raises MalformedProgramError on dimension mismatch, before any pivoting.
    The returned primal and duals are recomputed from the final basis against
    the original data, so they do not carry accumulated tableau drift.
    """
    problems = lp.dimension_errors()
    if problems:
        raise MalformedProgramError("; ".join(problems))

    sf = _to_standard_form(lp)
    A, b = sf.A.copy(), sf.b.copy()
    relations = list(sf.relations)
    m, n_std = A.shape

    # Nonnegative rhs; a >= row with zero rhs is flipped to <= so its slack can start basic.
    flip = np.ones(m)
    for i in range(m):
        if b[i] < 0 or (b[i] == 0 and relations[i] == ">="):
            A[i, :] *= -1.0
            b[i] *= -1.0
            flip[i] = -1.0
            if relations[i] == "<=":
                relations[i] = ">="
            elif relations[i] == ">=":
                relations[i] = "<="

    slack_cols: List[np.ndarray] = []
    artificial_rows: List[int] = []
    basis: List[int] = [-1] * m
    for i, rel in enumerate(relations):
        if rel == "<=":
            col = np.zeros(m)
            col[i] = 1.0
            slack_cols.append(col)
            basis[i] = n_std + len(slack_cols) - 1
        elif rel == ">=":
            col = np.zeros(m)
            col[i] = -1.0
            slack_cols.append(col)
            artificial_rows.append(i)
        else:
            artificial_rows.append(i)

    n_slack = len(slack_cols)
    n_art = len(artificial_rows)
    M = np.hstack([A, np.column_stack(slack_cols)]) if n_slack else A.copy()
    M = M.reshape(m, n_std + n_slack)
    n_real = n_std + n_slack

    T = np.zeros((m + 1, n_real + n_art + 1))
    T[:m, :n_real] = M
    T[:m, -1] = b
    for k, i in enumerate(artificial_rows):
        T[i, n_real + k] = 1.0
        basis[i] = n_real + k

    scale = max(1.0, float(np.abs(b).max())) if m else 1.0
    feas_tol = TOL * scale

    # Phase 1: minimize the sum of artificials.
    pivots = 0
    if n_art:
        T[-1, n_real:n_real + n_art] = 1.0
        for i in artificial_rows:
            T[-1, :] -= T[i, :]
        _, pivots = _simplex(T, basis, n_real + n_art, TOL, pivots)
        infeasibility = -T[-1, -1]
        logger.debug("phase 1 finished after %d pivots, infeasibility %.3e", pivots, infeasibility)
        if infeasibility > feas_tol:
            return LpSolution(status="Infeasible", iterations=pivots)

        keep = list(range(m))
        for i in range(m):
            if basis[i] < n_real:
                continue
            row_vals = np.abs(T[i, :n_real])
            j = int(np.argmax(row_vals)) if n_real else -1
            if j >= 0 and row_vals[j] > TOL:
                _pivot(T, i, j)
                basis[i] = j
                pivots += 1
            else:
                keep.remove(i)
        if len(keep) < m:
            logger.debug("dropping %d redundant rows", m - len(keep))
        rows = keep + [m]
        T = T[rows, :]
        basis = [basis[i] for i in keep]
        T = np.hstack([T[:, :n_real], T[:, -1:]])
    else:
        keep = list(range(m))

    # Phase 2: the real objective, priced out against the current basis.
    c_full = np.concatenate([sf.c, np.zeros(n_slack)])
    T[-1, :] = 0.0
    T[-1, :n_real] = c_full
    for i, bc in enumerate(basis):
        if c_full[bc] != 0.0:
            T[-1, :] -= c_full[bc] * T[i, :]
    status, pivots = _simplex(T, basis, n_real, TOL, pivots)
    if status == "unbounded":
        logger.debug("phase 2 unbounded after %d pivots", pivots)
        return LpSolution(status="Unbounded", iterations=pivots)

    x_std = np.zeros(n_real)
    duals_std = np.zeros(m)
    if keep:
        B = M[np.ix_(keep, basis)]
        try:
            x_basic = np.linalg.solve(B, b[keep])
            y = np.linalg.solve(B.T, c_full[basis])
        except np.linalg.LinAlgError as e:
            raise LpSolverError(f"singular final basis: {e}") from e
        x_basic[(x_basic < 0) & (x_basic > -feas_tol)] = 0.0
        x_std[basis] = x_basic
        duals_std[keep] = y

    primal: List[float] = []
    for shift, parts in sf.recover:
        primal.append(float(shift + sum(sign * x_std[col] for col, sign in parts)))

    sense_sign = -1.0 if lp.sense == "maximize" else 1.0
    duals = (duals_std * flip * sense_sign)[: sf.original_rows]

    logger.debug("solved %dx%d program in %d pivots", len(lp.constraints), lp.num_variables, pivots)
    return LpSolution(
        status="Optimal",
        primal=primal,
        objective=lp.objective_value(primal),
        duals=[float(v) for v in duals],
        iterations=pivots,
    )
