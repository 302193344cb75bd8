"""Linear program schema. Dense rows, per-variable bounds, no integrality."""

import math
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

Sense = Literal["minimize", "maximize"]
Relation = Literal["<=", "=", ">="]
LpStatus = Literal["Optimal", "Infeasible", "Unbounded"]


class Constraint(BaseModel):
    """One row: coefficients · x (relation) rhs."""

    coefficients: List[float] = Field(..., description="One coefficient per variable")
    relation: Relation = Field(..., description="Row relation")
    rhs: float = Field(..., description="Right-hand side")

    @field_validator("rhs")
    @classmethod
    def rhs_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("rhs must be finite")
        return v


class Bound(BaseModel):
    """Variable bound. Use -inf / +inf for free directions."""

    lower: float = Field(default=0.0, description="Lower bound, may be -inf")
    upper: float = Field(default=math.inf, description="Upper bound, may be +inf")

    @model_validator(mode="after")
    def lower_not_above_upper(self) -> "Bound":
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("bounds must not be NaN")
        if self.lower == math.inf or self.upper == -math.inf:
            raise ValueError("lower bound cannot be +inf and upper bound cannot be -inf")
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        return self


FREE = Bound(lower=-math.inf, upper=math.inf)
NONNEGATIVE = Bound()


class LinearProgram(BaseModel):
    """
    Dense linear program. An empty bounds list means every variable is in [0, +inf).
    Dimension checks live in dimension_errors() so that solve_lp can reject
    malformed programs with a dedicated error.
    """

    sense: Sense = Field(default="minimize")
    cost: List[float] = Field(..., description="Objective coefficients")
    constraints: List[Constraint] = Field(default_factory=list)
    bounds: List[Bound] = Field(default_factory=list, description="Per-variable bounds")

    @property
    def num_variables(self) -> int:
        return len(self.cost)

    def variable_bounds(self) -> List[Bound]:
        return self.bounds if self.bounds else [NONNEGATIVE] * len(self.cost)

    def dimension_errors(self) -> List[str]:
        """Return list of dimension problems, empty if well-formed."""
        errors: List[str] = []
        n = len(self.cost)
        if n == 0:
            errors.append("program has no variables")
        if not all(math.isfinite(c) for c in self.cost):
            errors.append("cost coefficients must be finite")
        for i, row in enumerate(self.constraints):
            if len(row.coefficients) != n:
                errors.append(
                    f"constraint {i} has {len(row.coefficients)} coefficients, expected {n}"
                )
            elif not all(math.isfinite(a) for a in row.coefficients):
                errors.append(f"constraint {i} has non-finite coefficients")
        if self.bounds and len(self.bounds) != n:
            errors.append(f"{len(self.bounds)} bounds given for {n} variables")
        return errors

    def objective_value(self, x: List[float]) -> float:
        return float(sum(c * v for c, v in zip(self.cost, x)))

    def max_violation(self, x: List[float]) -> float:
        """Largest constraint or bound violation at x (0 when feasible)."""
        worst = 0.0
        for row in self.constraints:
            lhs = sum(a * v for a, v in zip(row.coefficients, x))
            if row.relation == "<=":
                worst = max(worst, lhs - row.rhs)
            elif row.relation == ">=":
                worst = max(worst, row.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - row.rhs))
        for b, v in zip(self.variable_bounds(), x):
            worst = max(worst, b.lower - v, v - b.upper)
        return worst


class LpSolution(BaseModel):
    """Solver output. primal/duals/objective are only populated when Optimal."""

    status: LpStatus
    primal: List[float] = Field(default_factory=list)
    objective: Optional[float] = Field(default=None)
    duals: List[float] = Field(
        default_factory=list,
        description="d(objective)/d(rhs) per constraint, in the program's own sense",
    )
    iterations: int = Field(default=0, ge=0, description="Total pivots over both phases")
