"""Secret key rate from estimated bounds, and the sigma-to-failure mapping."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True, slots=True)
class KeyRateInputs:
    """Inputs to the rate formula, all per signal-pair pulse in the z basis.

    q11_z: lower bound on the single-photon pair gain of the signal channel.
    e11_x: upper bound on the phase error rate (x basis).
    gain_z, qber_z: observed signal-channel gain and QBER (z basis).
    f_ec: error-correction inefficiency, >= 1.
    """

    q11_z: float
    e11_x: float
    gain_z: float
    qber_z: float
    f_ec: float

    def __post_init__(self):
        for name in ("q11_z", "e11_x", "gain_z", "qber_z"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")
        if not (isinstance(self.f_ec, (int, float)) and math.isfinite(self.f_ec) and self.f_ec >= 1.0):
            raise ValidationError(f"f_ec must be >= 1, got {self.f_ec!r}")


@dataclass(frozen=True, slots=True)
class KeyRateBreakdown:
    """Rate with its two terms and the raw (unclamped) value preserved."""

    rate: float
    raw: float
    privacy_term: float
    ec_cost: float
    flags: tuple


def binary_entropy(e: float) -> float:
    """H(e) = -e log2 e - (1-e) log2(1-e), with 0 log 0 = 0."""
    if not (isinstance(e, (int, float)) and math.isfinite(e) and 0.0 <= e <= 1.0):
        raise ValidationError(f"binary_entropy argument must lie in [0, 1], got {e!r}")
    if e == 0.0 or e == 1.0:
        return 0.0
    return -e * math.log2(e) - (1.0 - e) * math.log2(1.0 - e)


def key_rate_breakdown(inputs: KeyRateInputs) -> KeyRateBreakdown:
    """R = q11_z [1 - H(e11_x)] - gain_z f_ec H(qber_z), clamped at 0.

    e11_x is clamped into [0, 1/2] before the entropy; a value above 1/2
    zeroes the privacy term and is flagged. The unclamped raw rate is kept
    for cutoff-finding in sweeps.
    """
    flags = []
    e11 = inputs.e11_x
    if e11 > 0.5:
        e11 = 0.5
        flags.append("e11_x_above_half")
    privacy = inputs.q11_z * (1.0 - binary_entropy(e11))
    ec_cost = inputs.gain_z * inputs.f_ec * binary_entropy(inputs.qber_z)
    raw = privacy - ec_cost
    if raw < 0.0:
        flags.append("rate_clamped_to_zero")
    return KeyRateBreakdown(
        rate=max(0.0, raw),
        raw=raw,
        privacy_term=privacy,
        ec_cost=ec_cost,
        flags=tuple(flags),
    )


def key_rate(inputs: KeyRateInputs) -> float:
    """Clamped secret key rate in bits per signal-pair pulse."""
    return key_rate_breakdown(inputs).rate


def failure_probability(n_alpha: float) -> float:
    """Two-sided Gaussian tail mass beyond n_alpha standard deviations."""
    if not (isinstance(n_alpha, (int, float)) and math.isfinite(n_alpha) and n_alpha >= 0):
        raise ValidationError(f"n_alpha must be >= 0, got {n_alpha!r}")
    return math.erfc(n_alpha / math.sqrt(2.0))
