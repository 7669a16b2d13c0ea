"""Decoy-state bounds on single-photon yields and errors via linear programming.

Observed gains and QBERs constrain the unknown per-photon-number yield
matrices through Poisson-weighted sums. Finite statistics widen each observed
rate into a band of n_alpha standard deviations; the resulting inequality
system is extremized with the in-tree LP solver to produce lower/upper bounds
on Y11 (from gain constraints over yields) and on e11*Y11 (from error-gain
constraints over error-yields). Error-rate bounds follow by division:
e11 upper = ey11 upper / Y11 lower, e11 lower = ey11 lower / Y11 upper.

The gain and error systems are deliberately decoupled (no b_ij <= y_ij
coupling); each LP is a box problem over cutoff^2 variables in [0, 1],
ordered row-major so Y[1][1] sits at index cutoff + 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, ValidationError
from .lp_solver import LinearProgram, solve
from .photon_number import truncation_bound, weight_vector

BASES = ("z", "x")
CONSTRAINT_KINDS = ("gain", "error_gain")
ZERO_COUNT_POLICIES = ("poisson-upper",)


@dataclass(frozen=True, slots=True)
class ObservedEntry:
    """Observed statistics of one (intensity pair, basis) channel."""

    basis: str
    k: int
    l: int
    mu: float
    nu: float
    pulses: float
    gain: float
    qber: float

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValidationError(f"basis must be one of {BASES}, got {self.basis!r}")
        for name in ("k", "l"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and v >= 0):
                raise ValidationError(f"{name} must be a nonnegative integer, got {v!r}")
        for name, low_ok in (("mu", 0.0), ("nu", 0.0)):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= low_ok):
                raise ValidationError(f"{name} must be finite and >= {low_ok}, got {v!r}")
        if not (isinstance(self.pulses, (int, float)) and self.pulses > 0 and math.isfinite(self.pulses)):
            raise ValidationError(f"pulses must be positive, got {self.pulses!r}")
        for name in ("gain", "qber"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True, slots=True)
class ObservedStats:
    """Collection of ObservedEntry records, unique per (basis, k, l)."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise ValidationError("ObservedStats needs at least one entry")
        seen = set()
        for e in entries:
            if not isinstance(e, ObservedEntry):
                raise ValidationError(f"entries must be ObservedEntry, got {type(e).__name__}")
            key = (e.basis, e.k, e.l)
            if key in seen:
                raise ValidationError(f"duplicate entry for (basis, k, l) = {key}")
            seen.add(key)
        object.__setattr__(self, "entries", entries)

    def for_basis(self, basis: str) -> tuple:
        return tuple(e for e in self.entries if e.basis == basis)

    def get(self, k: int, l: int, basis: str):
        for e in self.entries:
            if (e.basis, e.k, e.l) == (basis, k, l):
                return e
        return None

    def intensities(self) -> tuple[tuple, tuple]:
        """Distinct (sorted) intensity values seen per party."""
        mus = tuple(sorted({e.mu for e in self.entries}))
        nus = tuple(sorted({e.nu for e in self.entries}))
        return mus, nus


@dataclass(frozen=True, slots=True)
class FluctuationConfig:
    """Statistical-fluctuation settings for constraint building.

    n_alpha: number of standard deviations around each observed rate.
    cutoff: photon-number truncation (terms i, j < cutoff kept).
    rigorous_tail: widen both sides of every band by the truncation slack
        tau(mu, cutoff) + tau(nu, cutoff), making the truncated system a
        guaranteed relaxation of the untruncated one.
    zero_count_policy: how to constrain a channel whose observed count is 0;
        the single implemented policy, "poisson-upper", omits the lower
        constraint and caps the rate at n_alpha^2 / pulses.
    """

    n_alpha: float
    cutoff: int = 7
    rigorous_tail: bool = False
    zero_count_policy: str = "poisson-upper"

    def __post_init__(self):
        if not (isinstance(self.n_alpha, (int, float)) and math.isfinite(self.n_alpha) and self.n_alpha >= 0):
            raise ValidationError(f"n_alpha must be >= 0, got {self.n_alpha!r}")
        if not (isinstance(self.cutoff, int) and self.cutoff >= 2):
            raise ValidationError(f"cutoff must be an integer >= 2, got {self.cutoff!r}")
        if self.zero_count_policy not in ZERO_COUNT_POLICIES:
            raise ValidationError(
                f"zero_count_policy must be one of {ZERO_COUNT_POLICIES}, got {self.zero_count_policy!r}"
            )


@dataclass(frozen=True, slots=True)
class DecoyBounds:
    """LP bounds per basis, plus derived error-rate bounds.

    ey11 values bound the product e11 * Y11; e11 values are the quotient
    bounds used downstream. lp_status pairs each LP name with its outcome.
    """

    y11_z_lower: float
    y11_z_upper: float
    y11_x_lower: float
    y11_x_upper: float
    ey11_z_lower: float
    ey11_z_upper: float
    ey11_x_lower: float
    ey11_x_upper: float
    e11_z_lower: float
    e11_z_upper: float
    e11_x_lower: float
    e11_x_upper: float
    lp_status: tuple
    flags: tuple


def fluctuation_ratios(pulses: float, gain: float, qber: float, n_alpha: float) -> tuple[float, float]:
    """Relative band half-widths (beta_q, beta_eq) for one channel.

    beta_q = n_alpha / sqrt(N * Q), beta_eq = n_alpha / sqrt(N * E * Q).
    n_alpha = 0 gives (0, 0). A zero success or error count with n_alpha > 0
    yields math.inf for the affected ratio; constraint building dispatches
    such channels to the zero-count policy instead of using the ratio.
    """
    if not (isinstance(pulses, (int, float)) and pulses > 0 and math.isfinite(pulses)):
        raise ValidationError(f"pulses must be positive, got {pulses!r}")
    for name, v in (("gain", gain), ("qber", qber)):
        if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
            raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")
    if not (isinstance(n_alpha, (int, float)) and math.isfinite(n_alpha) and n_alpha >= 0):
        raise ValidationError(f"n_alpha must be >= 0, got {n_alpha!r}")
    if n_alpha == 0:
        return 0.0, 0.0
    count_q = pulses * gain
    count_eq = count_q * qber
    beta_q = n_alpha / math.sqrt(count_q) if count_q > 0 else math.inf
    beta_eq = n_alpha / math.sqrt(count_eq) if count_eq > 0 else math.inf
    return beta_q, beta_eq


def _coefficients(mu: float, nu: float, cutoff: int) -> np.ndarray:
    """Row-major Poisson product weights over (i, j), i, j < cutoff."""
    return np.outer(weight_vector(mu, cutoff), weight_vector(nu, cutoff)).ravel()


def build_constraints(obs: ObservedStats, cfg: FluctuationConfig, basis: str, kind: str) -> list:
    """Two-sided band constraints for one basis and one observable kind.

    Returns (coeffs, relation, rhs) triples over the cutoff^2 yield (or
    error-yield) variables. Lower sides are clamped at 0; channels with a
    zero observed count get only the policy upper bound. With rigorous_tail,
    both sides are widened by the truncation slack so dropping photon numbers
    >= cutoff can never exclude the physical yield matrix.
    """
    if basis not in BASES:
        raise ValidationError(f"basis must be one of {BASES}, got {basis!r}")
    if kind not in CONSTRAINT_KINDS:
        raise ValidationError(f"kind must be one of {CONSTRAINT_KINDS}, got {kind!r}")
    entries = obs.for_basis(basis)
    if not entries:
        raise ValidationError(f"no observed entries for basis {basis!r}")
    constraints = []
    for e in entries:
        rate = e.gain if kind == "gain" else e.gain * e.qber
        coeffs = tuple(_coefficients(e.mu, e.nu, cfg.cutoff))
        slack = (
            truncation_bound(e.mu, cfg.cutoff) + truncation_bound(e.nu, cfg.cutoff)
            if cfg.rigorous_tail
            else 0.0
        )
        count = e.pulses * rate
        if count <= 0.0:
            constraints.append((coeffs, "<=", cfg.n_alpha**2 / e.pulses + slack))
            continue
        beta_q, beta_eq = fluctuation_ratios(e.pulses, e.gain, e.qber, cfg.n_alpha)
        beta = beta_q if kind == "gain" else beta_eq
        constraints.append((coeffs, "<=", rate * (1.0 + beta) + slack))
        constraints.append((coeffs, ">=", max(0.0, rate * (1.0 - beta) - slack)))
    return constraints


def _extremize(obs: ObservedStats, cfg: FluctuationConfig, basis: str, kind: str, direction: str) -> float:
    if direction not in ("lower", "upper"):
        raise ValidationError(f"direction must be lower or upper, got {direction!r}")
    constraints = build_constraints(obs, cfg, basis, kind)
    n = cfg.cutoff * cfg.cutoff
    objective = [0.0] * n
    objective[cfg.cutoff + 1] = 1.0  # row-major index of the (1, 1) entry
    lp = LinearProgram(
        n_vars=n,
        objective=tuple(objective),
        direction="minimize" if direction == "lower" else "maximize",
        constraints=tuple(constraints),
    )
    sol = solve(lp)
    if sol.status != "optimal":
        raise InfeasibleError(
            f"{kind} constraints for basis {basis!r} admit no yield matrix; "
            "the observed statistics are mutually inconsistent",
            constraints=constraints,
        )
    return float(sol.objective_value)


def bound_y11(obs: ObservedStats, cfg: FluctuationConfig, basis: str, direction: str) -> float:
    """LP extremum of Y[1][1] under the basis's gain constraints."""
    return _extremize(obs, cfg, basis, "gain", direction)


def bound_ey11_upper(obs: ObservedStats, cfg: FluctuationConfig, basis: str) -> float:
    """LP maximum of the error-yield b[1][1] under error-gain constraints."""
    return _extremize(obs, cfg, basis, "error_gain", "upper")


def _divide_bounds(ey_lower, ey_upper, y_lower, y_upper, basis, flags):
    """Quotient bounds on e11 from product and yield bounds."""
    if ey_lower <= 0.0:
        e_lower = 0.0
    elif y_upper <= 0.0:
        e_lower = 1.0
    else:
        e_lower = min(1.0, ey_lower / y_upper)
    if ey_upper <= 0.0:
        e_upper = 0.0
    elif y_lower <= 0.0:
        e_upper = 1.0
        flags.append(f"e11_{basis}_vacuous")
    else:
        e_upper = min(1.0, ey_upper / y_lower)
    return e_lower, e_upper


def estimate(obs: ObservedStats, cfg: FluctuationConfig) -> DecoyBounds:
    """Run the eight LPs (per basis: Y11 min/max, e11*Y11 min/max) and derive
    the e11 quotient bounds. Scenarios with fewer than two distinct
    intensities per party are still solved but flagged vacuous."""
    flags = []
    mus, nus = obs.intensities()
    if len(mus) < 2 or len(nus) < 2:
        flags.append("vacuous_intensities")
    values = {}
    status = []
    for basis in BASES:
        for kind, tag in (("gain", "y11"), ("error_gain", "ey11")):
            for direction in ("lower", "upper"):
                name = f"{tag}_{basis}_{direction}"
                values[name] = _extremize(obs, cfg, basis, kind, direction)
                status.append((name, "optimal"))
    e11_z_lower, e11_z_upper = _divide_bounds(
        values["ey11_z_lower"], values["ey11_z_upper"],
        values["y11_z_lower"], values["y11_z_upper"], "z", flags,
    )
    e11_x_lower, e11_x_upper = _divide_bounds(
        values["ey11_x_lower"], values["ey11_x_upper"],
        values["y11_x_lower"], values["y11_x_upper"], "x", flags,
    )
    return DecoyBounds(
        y11_z_lower=values["y11_z_lower"],
        y11_z_upper=values["y11_z_upper"],
        y11_x_lower=values["y11_x_lower"],
        y11_x_upper=values["y11_x_upper"],
        ey11_z_lower=values["ey11_z_lower"],
        ey11_z_upper=values["ey11_z_upper"],
        ey11_x_lower=values["ey11_x_lower"],
        ey11_x_upper=values["ey11_x_upper"],
        e11_z_lower=e11_z_lower,
        e11_z_upper=e11_z_upper,
        e11_x_lower=e11_x_lower,
        e11_x_upper=e11_x_upper,
        lp_status=tuple(status),
        flags=tuple(flags),
    )
