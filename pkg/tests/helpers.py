"""Shared test utilities: an exhaustive LP oracle, a random LP generator,
and a builder for analytic observed statistics."""
from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from mdiqkd import (
    ChannelParams,
    DecoyProtocol,
    FluctuationConfig,
    LinearProgram,
    ObservedStats,
    Scenario,
    simulate_observed,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

TABLE_PARAMS = dict(p_d=3e-6, e_d=0.015)


def vertex_optimum(lp: LinearProgram, tol: float = 1e-9) -> tuple[str, float | None]:
    """Exhaustive oracle for small box LPs.

    The feasible region is a bounded polyhedron, so when nonempty it has a
    vertex attaining the optimum. Enumerate every choice of n_vars active
    hyperplanes (constraints as equalities plus variable bounds), solve the
    square system, keep feasible points, and extremize the objective over
    them. Independent of the simplex implementation under test.
    """
    n = lp.n_vars
    planes: list[tuple[np.ndarray, float]] = []
    for coeffs, _relation, rhs in lp.constraints:
        planes.append((np.asarray(coeffs, dtype=float), float(rhs)))
    for j, (lo, hi) in enumerate(lp.var_bounds):
        unit = np.zeros(n)
        unit[j] = 1.0
        planes.append((unit, lo))
        if np.isfinite(hi):
            planes.append((unit.copy(), hi))

    obj = np.asarray(lp.objective, dtype=float)
    best: float | None = None
    for combo in itertools.combinations(range(len(planes)), n):
        a_mat = np.array([planes[i][0] for i in combo])
        rhs = np.array([planes[i][1] for i in combo])
        if abs(np.linalg.det(a_mat)) < 1e-12:
            continue
        x = np.linalg.solve(a_mat, rhs)
        if not lp_point_feasible(lp, x, tol):
            continue
        value = float(obj @ x)
        if best is None:
            best = value
        elif lp.direction == "minimize":
            best = min(best, value)
        else:
            best = max(best, value)
    return ("infeasible", None) if best is None else ("optimal", best)


def lp_point_feasible(lp: LinearProgram, x: np.ndarray, tol: float = 1e-9) -> bool:
    for j, (lo, hi) in enumerate(lp.var_bounds):
        if x[j] < lo - tol or x[j] > hi + tol:
            return False
    for coeffs, relation, rhs in lp.constraints:
        lhs = float(np.asarray(coeffs) @ x)
        if relation == "<=" and lhs > rhs + tol:
            return False
        if relation == ">=" and lhs < rhs - tol:
            return False
    return True


def random_box_lp(rng: np.random.Generator) -> LinearProgram:
    """Random instance within the oracle's reach: at most 3 variables and 6
    inequality constraints over the unit box. Right-hand sides are anchored
    at a random interior point so feasible and infeasible cases both occur
    with decisive margins."""
    n = int(rng.integers(1, 4))
    m = int(rng.integers(0, 7))
    objective = tuple(rng.uniform(-1.0, 1.0, n))
    constraints = []
    for _ in range(m):
        coeffs = rng.uniform(-1.0, 1.0, n)
        anchor = rng.uniform(0.0, 1.0, n)
        margin = rng.uniform(-0.3, 0.5)
        if rng.random() < 0.5:
            constraints.append((tuple(coeffs), "<=", float(coeffs @ anchor) + margin))
        else:
            constraints.append((tuple(coeffs), ">=", float(coeffs @ anchor) - margin))
    return LinearProgram(
        n_vars=n,
        objective=objective,
        direction="minimize" if rng.random() < 0.5 else "maximize",
        constraints=tuple(constraints),
    )


def analytic_stats(
    eta: float,
    intensities: tuple,
    n_data: float = 1e10,
    p_d: float = 3e-6,
    e_d: float = 0.015,
) -> ObservedStats:
    """Expected statistics for a symmetric channel and symmetric intensity sets."""
    scenario = Scenario(
        channel=ChannelParams(eta_a=eta, eta_b=eta, p_d=p_d, e_d=e_d),
        protocol=DecoyProtocol(
            intensities_a=tuple(intensities),
            intensities_b=tuple(intensities),
            signal_a=len(intensities) - 1,
            signal_b=len(intensities) - 1,
            n_data=n_data,
            n_alpha=5.0,
            f_ec=1.16,
        ),
        estimation=FluctuationConfig(n_alpha=5.0),
        mode="analytic",
        seed=0,
    )
    return simulate_observed(scenario)
