"""Finite-data security analysis for decoy-state MDI-QKD.

The package chains four stages: closed-form detection statistics for
weak-coherent pulses through a lossy channel with dark counts
(channel_model), Poisson photon-number bookkeeping (photon_number),
LP bounds on the single-photon yield and error rate under statistical
fluctuations (estimation, on top of lp_solver), and the resulting
secret key rate (keyrate). runner_cli wires them into scenario files,
CSV outputs, and a command-line tool.
"""
from .channel_model import (
    E0,
    AuxVars,
    ChannelParams,
    GainQber,
    aux_vars,
    bessel_i0,
    gain_qber_x,
    gain_qber_z,
    q11,
    single_photon_stats,
)
from .errors import InfeasibleError, LpError, ValidationError
from .estimation import (
    DecoyBounds,
    FluctuationConfig,
    ObservedEntry,
    ObservedStats,
    bound_ey11_upper,
    bound_y11,
    build_constraints,
    estimate,
    fluctuation_ratios,
)
from .keyrate import (
    KeyRateBreakdown,
    KeyRateInputs,
    binary_entropy,
    failure_probability,
    key_rate,
    key_rate_breakdown,
)
from .lp_solver import LinearProgram, LpSolution, solve
from .photon_number import (
    YieldMatrix,
    poisson_weight,
    predicted_error_gain,
    predicted_gain,
    truncation_bound,
    weight_vector,
)
from .runner_cli import (
    DecoyProtocol,
    KeyRateReport,
    LossSweep,
    Scenario,
    SweepPoint,
    ingest_counts,
    load_scenario,
    run_point,
    run_sweep,
    simulate_observed,
)

__version__ = "0.1.0"

__all__ = [
    "E0",
    "AuxVars",
    "ChannelParams",
    "DecoyBounds",
    "DecoyProtocol",
    "FluctuationConfig",
    "GainQber",
    "InfeasibleError",
    "KeyRateBreakdown",
    "KeyRateInputs",
    "KeyRateReport",
    "LinearProgram",
    "LossSweep",
    "LpError",
    "LpSolution",
    "ObservedEntry",
    "ObservedStats",
    "Scenario",
    "SweepPoint",
    "ValidationError",
    "YieldMatrix",
    "aux_vars",
    "bessel_i0",
    "binary_entropy",
    "bound_ey11_upper",
    "bound_y11",
    "build_constraints",
    "estimate",
    "failure_probability",
    "fluctuation_ratios",
    "gain_qber_x",
    "gain_qber_z",
    "ingest_counts",
    "key_rate",
    "key_rate_breakdown",
    "load_scenario",
    "poisson_weight",
    "predicted_error_gain",
    "predicted_gain",
    "q11",
    "run_point",
    "run_sweep",
    "simulate_observed",
    "single_photon_stats",
    "solve",
    "truncation_bound",
    "weight_vector",
]
