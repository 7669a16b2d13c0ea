"""Poisson photon-number decomposition of coherent-state channels.

A phase-randomized coherent pulse of intensity mu is a Poisson mixture over
photon numbers. Channel observables are therefore Poisson-weighted sums of
per-photon-number yields; truncating the sum at a cutoff k discards a tail
whose probability mass is bounded by tau(mu, k).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True, slots=True)
class YieldMatrix:
    """Truncated grids of yields y[i][j] and error-yields b[i][j] = e_ij * Y_ij
    for Alice sending i and Bob sending j photons, i, j < cutoff."""

    cutoff: int
    y: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if not (isinstance(self.cutoff, int) and self.cutoff >= 2):
            raise ValidationError(f"cutoff must be an integer >= 2, got {self.cutoff}")
        for name in ("y", "b"):
            grid = np.asarray(getattr(self, name), dtype=float)
            if grid.shape != (self.cutoff, self.cutoff):
                raise ValidationError(
                    f"{name} must have shape ({self.cutoff}, {self.cutoff}), got {grid.shape}"
                )
            if np.any(~np.isfinite(grid)) or np.any(grid < 0) or np.any(grid > 1):
                raise ValidationError(f"{name} entries must lie in [0, 1]")
            grid = grid.copy()
            grid.setflags(write=False)
            object.__setattr__(self, name, grid)


def poisson_weight(mu: float, i: int) -> float:
    """P(n = i) for a Poisson distribution of mean mu; 0^0 = 1 so that
    poisson_weight(0, 0) = 1."""
    if not (isinstance(mu, (int, float)) and math.isfinite(mu)) or mu < 0:
        raise ValidationError(f"mu must be a finite nonnegative number, got {mu!r}")
    if not isinstance(i, (int, np.integer)) or i < 0:
        raise ValidationError(f"photon count must be a nonnegative integer, got {i!r}")
    if mu == 0.0:
        return 1.0 if i == 0 else 0.0
    # Iterative mu^i / i! avoids factorial overflow for moderate i.
    term = math.exp(-mu)
    for n in range(1, int(i) + 1):
        term *= mu / n
    return term


def weight_vector(mu: float, cutoff: int) -> np.ndarray:
    """Poisson weights [P(0), ..., P(cutoff-1)] as an array."""
    if not (isinstance(cutoff, int) and cutoff >= 1):
        raise ValidationError(f"cutoff must be an integer >= 1, got {cutoff}")
    out = np.empty(cutoff)
    out[0] = poisson_weight(mu, 0)
    for i in range(1, cutoff):
        out[i] = out[i - 1] * (mu / i) if mu > 0 else 0.0
    return out


def predicted_gain(ym: YieldMatrix, mu: float, nu: float) -> float:
    """Sum_{i,j < cutoff} P(mu,i) P(nu,j) y[i][j]."""
    wa = weight_vector(mu, ym.cutoff)
    wb = weight_vector(nu, ym.cutoff)
    return float(wa @ ym.y @ wb)


def predicted_error_gain(ym: YieldMatrix, mu: float, nu: float) -> float:
    """Sum_{i,j < cutoff} P(mu,i) P(nu,j) b[i][j]."""
    wa = weight_vector(mu, ym.cutoff)
    wb = weight_vector(nu, ym.cutoff)
    return float(wa @ ym.b @ wb)


def truncation_bound(mu: float, k: int) -> float:
    """tau(mu, k) = 1 - (Poisson CDF at k-1)^2.

    Upper bound on the joint probability that a pair of independent
    Poisson(mu) sources leaves the truncated region {both counts < k}.
    Monotone decreasing in k and increasing in mu.

    Evaluated as tail * (2 - tail) with tail = P(n >= k) summed directly;
    the naive 1 - cdf^2 cancels catastrophically once the cdf is near 1
    and would cap the relative accuracy near 1e-10 for the small tails
    this package works with.
    """
    if not (isinstance(k, int) and k >= 1):
        raise ValidationError(f"k must be an integer >= 1, got {k}")
    term = poisson_weight(mu, k)
    tail = 0.0
    i = k
    while term > 1e-18 * (tail + 1e-300):
        tail += term
        i += 1
        term *= mu / i
    tail = min(tail, 1.0)
    return tail * (2.0 - tail)
