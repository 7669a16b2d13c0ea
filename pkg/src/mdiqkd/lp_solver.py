"""Dense two-phase primal simplex for small box-constrained LPs.

Built for the yield-estimation problems in this package: tens of variables in
[0, 1], tens of two-sided rate constraints whose coefficients span twenty
orders of magnitude. Generic LP codes at default tolerances routinely declare
these instances infeasible, so this solver always equilibrates each row by its
largest coefficient magnitude before pivoting and uses a relative pivot
threshold.

Deterministic by construction: Bland's rule (lowest eligible index enters;
ratio ties leave by lowest basic index), so repeated solves of one instance
return bit-identical assignments and cycling cannot occur.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LpError, ValidationError

RELATIONS = ("<=", ">=")

# Reduced-cost optimality threshold and phase-1 feasibility threshold, applied
# to row-equilibrated data; pivot entries at or below PIVOT_TOL are treated as
# zero in the ratio test.
OPT_TOL = 1e-9
FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
ITER_CAP_PER_VAR = 10_000


@dataclass(frozen=True, slots=True)
class LinearProgram:
    """minimize or maximize objective . x subject to linear inequalities and
    per-variable bounds (default box [0, 1])."""

    n_vars: int
    objective: tuple
    direction: str
    constraints: tuple
    var_bounds: tuple = ()

    def __post_init__(self):
        if not (isinstance(self.n_vars, int) and self.n_vars >= 1):
            raise ValidationError(f"n_vars must be a positive integer, got {self.n_vars}")
        if self.direction not in ("minimize", "maximize"):
            raise ValidationError(f"direction must be minimize or maximize, got {self.direction!r}")
        obj = np.asarray(self.objective, dtype=float)
        if obj.shape != (self.n_vars,) or not np.all(np.isfinite(obj)):
            raise ValidationError("objective must be a finite vector of length n_vars")
        object.__setattr__(self, "objective", tuple(obj))
        rows = []
        for idx, con in enumerate(self.constraints):
            try:
                coeffs, relation, rhs = con
            except (TypeError, ValueError):
                raise ValidationError(f"constraint {idx} is not a (coeffs, relation, rhs) triple")
            a = np.asarray(coeffs, dtype=float)
            if a.shape != (self.n_vars,) or not np.all(np.isfinite(a)):
                raise ValidationError(f"constraint {idx}: coefficient vector must be finite length-{self.n_vars}")
            if relation not in RELATIONS:
                raise ValidationError(f"constraint {idx}: relation must be one of {RELATIONS}, got {relation!r}")
            rhs = float(rhs)
            if not np.isfinite(rhs):
                raise ValidationError(f"constraint {idx}: rhs must be finite")
            rows.append((tuple(a), relation, rhs))
        object.__setattr__(self, "constraints", tuple(rows))
        bounds = self.var_bounds or tuple((0.0, 1.0) for _ in range(self.n_vars))
        if len(bounds) != self.n_vars:
            raise ValidationError("var_bounds must have one (lo, hi) pair per variable")
        cleaned = []
        for idx, (lo, hi) in enumerate(bounds):
            lo, hi = float(lo), float(hi)
            if not np.isfinite(lo):
                raise ValidationError(f"variable {idx}: lower bound must be finite")
            if hi < lo:
                raise ValidationError(f"variable {idx}: upper bound {hi} below lower bound {lo}")
            cleaned.append((lo, hi))
        object.__setattr__(self, "var_bounds", tuple(cleaned))


@dataclass(frozen=True, slots=True)
class LpSolution:
    status: str
    objective_value: float | None = None
    assignment: tuple = field(default=())


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    piv = tableau[row] / tableau[row, col]
    tableau -= np.outer(tableau[:, col], piv)
    tableau[row] = piv
    basis[row] = col


def _bland_step(tableau: np.ndarray, basis: np.ndarray, n_allowed: int) -> bool:
    """One simplex pivot. Returns False when the objective row is optimal."""
    obj = tableau[-1, :n_allowed]
    entering = -1
    for j in range(n_allowed):
        if obj[j] < -OPT_TOL:
            entering = j
            break
    if entering < 0:
        return False
    col = tableau[:-1, entering]
    rhs = tableau[:-1, -1]
    best_ratio = np.inf
    leaving = -1
    for r in range(col.shape[0]):
        if col[r] > PIVOT_TOL:
            ratio = rhs[r] / col[r]
            if ratio < best_ratio - 1e-15 or (
                abs(ratio - best_ratio) <= 1e-15 and (leaving < 0 or basis[r] < basis[leaving])
            ):
                best_ratio = ratio
                leaving = r
    if leaving < 0:
        raise LpError(
            "entering column admits no pivot: the objective is unbounded over "
            "the feasible region (possible only with infinite variable bounds)"
        )
    _pivot(tableau, basis, leaving, entering)
    return True


def solve(lp: LinearProgram) -> LpSolution:
    """Solve the program; status is optimal or infeasible.

    Deterministic vertex solution. Raises LpError if the iteration cap
    (10000 * n_vars) is exhausted, which indicates an internal defect rather
    than a property of the input.
    """
    n = lp.n_vars
    lo = np.array([b[0] for b in lp.var_bounds])
    hi = np.array([b[1] for b in lp.var_bounds])
    width = hi - lo

    # Assemble rows as A x' <= b over shifted variables x' = x - lo >= 0.
    rows = []
    rhs_list = []
    for coeffs, relation, rhs in lp.constraints:
        a = np.asarray(coeffs)
        shifted = rhs - float(a @ lo)
        if relation == ">=":
            a, shifted = -a, -shifted
        scale = np.max(np.abs(a))
        if scale == 0.0:
            if shifted < 0.0:
                return LpSolution(status="infeasible")
            continue
        rows.append(a / scale)
        rhs_list.append(shifted / scale)
    for j in range(n):
        if np.isfinite(width[j]):
            unit = np.zeros(n)
            unit[j] = 1.0
            rows.append(unit)
            rhs_list.append(width[j])

    m = len(rows)
    a_mat = np.vstack(rows) if m else np.zeros((0, n))
    b_vec = np.array(rhs_list)

    # Slack block; rows with negative rhs are negated (slack becomes surplus)
    # and receive an artificial variable for the phase-1 basis.
    negate = b_vec < 0.0
    a_mat[negate] *= -1.0
    b_vec[negate] *= -1.0
    slack = np.eye(m)
    slack[negate, negate] = -1.0
    art_rows = np.flatnonzero(negate)
    n_slack = m
    n_art = art_rows.shape[0]
    n_real = n + n_slack
    n_total = n_real + n_art

    tableau = np.zeros((m + 1, n_total + 1))
    tableau[:m, :n] = a_mat
    tableau[:m, n : n + n_slack] = slack
    for k, r in enumerate(art_rows):
        tableau[r, n_real + k] = 1.0
    tableau[:m, -1] = b_vec

    basis = np.empty(m, dtype=int)
    basis[:] = np.arange(n, n + n_slack)
    for k, r in enumerate(art_rows):
        basis[r] = n_real + k

    iter_cap = ITER_CAP_PER_VAR * n
    iterations = 0

    def run_phase(n_allowed: int) -> None:
        nonlocal iterations
        while _bland_step(tableau, basis, n_allowed):
            iterations += 1
            if iterations > iter_cap:
                raise LpError(f"iteration cap {iter_cap} exhausted; internal defect")

    if n_art:
        cost = np.zeros(n_total + 1)
        cost[n_real:n_total] = 1.0
        tableau[-1] = cost
        for r in range(m):
            if cost[basis[r]] != 0.0:
                tableau[-1] -= cost[basis[r]] * tableau[r]
        run_phase(n_total)
        if -tableau[-1, -1] > FEAS_TOL:
            return LpSolution(status="infeasible")
        # Pivot leftover zero-level artificials out of the basis when possible;
        # a row with no real pivot entry is redundant and harmless to keep.
        for r in range(m):
            if basis[r] >= n_real:
                for j in range(n_real):
                    if abs(tableau[r, j]) > PIVOT_TOL:
                        _pivot(tableau, basis, r, j)
                        break

    sign = 1.0 if lp.direction == "minimize" else -1.0
    cost = np.zeros(n_total + 1)
    cost[:n] = sign * np.asarray(lp.objective)
    tableau[-1] = cost
    for r in range(m):
        if cost[basis[r]] != 0.0:
            tableau[-1] -= cost[basis[r]] * tableau[r]
    run_phase(n_real)

    shifted = np.zeros(n_total)
    shifted[basis] = tableau[:m, -1]
    x = lo + shifted[:n]
    np.clip(x, lo, hi, out=x)
    value = float(np.asarray(lp.objective) @ x)
    return LpSolution(status="optimal", objective_value=value, assignment=tuple(x))
