"""Scenario execution and the command-line interface.

Subcommands:
  simulate   compute (or sample) per-channel gains and QBERs -> gains.csv,
             qbers.csv, counts.csv (sampled mode only)
  estimate   run the LP estimation -> bounds.csv, bounds.png, report.txt
  keyrate    full chain: statistics -> bounds -> key rate -> all of the above
  sweep      key rate across a channel-loss grid -> sweep.csv, sweep.png

Scenario files are strict JSON with top-level keys {channel, protocol,
estimation, mode, seed}; unknown keys anywhere are rejected. Counts files are
CSV with header `basis,k,l,mu,nu,pulses,successes,errors` (UTF-8, LF).

All numeric CSV fields are written with repr precision (17 significant
digits) so a parsed-back value equals the computed one bit for bit; repeated
runs of the same scenario produce byte-identical CSV files. Figures are
rendered with the Agg backend next to the delimited output; they restate the
CSV contents and carry no additional data.

Exit codes: 0 success, 2 validation error (config, counts, flags),
3 infeasible estimation.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from .channel_model import E0, ChannelParams, gain_qber_x, gain_qber_z, q11, single_photon_stats
from .errors import InfeasibleError, ValidationError
from .estimation import (
    DecoyBounds,
    FluctuationConfig,
    ObservedEntry,
    ObservedStats,
    estimate,
)
from .keyrate import KeyRateInputs, binary_entropy, key_rate_breakdown

COUNTS_HEADER = ("basis", "k", "l", "mu", "nu", "pulses", "successes", "errors")
MODES = ("analytic", "sampled")

# Study defaults: misalignment 1.5%, dark counts 3e-6, EC inefficiency 1.16,
# 2e10 pulses per intensity-pair channel split evenly between the two bases.
DEFAULT_N_DATA = 1.0e10
DEFAULT_N_ALPHA = 5.0
DEFAULT_F_EC = 1.16


@dataclass(frozen=True, slots=True)
class DecoyProtocol:
    """Intensity sets and bookkeeping for one protocol configuration.

    n_data is the pulse count per (intensity pair, basis) channel.
    signal_a / signal_b index the signal intensity within each list.
    """

    intensities_a: tuple
    intensities_b: tuple
    signal_a: int
    signal_b: int
    n_data: float
    n_alpha: float
    f_ec: float

    def __post_init__(self):
        for name in ("intensities_a", "intensities_b"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ValidationError(f"{name} must be nonempty")
            if any(not math.isfinite(v) or v < 0 for v in vals):
                raise ValidationError(f"{name} must be nonnegative and finite")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValidationError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, vals)
        for name, vals in (("signal_a", self.intensities_a), ("signal_b", self.intensities_b)):
            idx = getattr(self, name)
            if not (isinstance(idx, int) and 0 <= idx < len(vals)):
                raise ValidationError(f"{name} must index into the intensity list, got {idx!r}")
        if not (isinstance(self.n_data, (int, float)) and self.n_data > 0 and math.isfinite(self.n_data)):
            raise ValidationError(f"n_data must be positive, got {self.n_data!r}")
        if not (isinstance(self.n_alpha, (int, float)) and self.n_alpha >= 0 and math.isfinite(self.n_alpha)):
            raise ValidationError(f"n_alpha must be >= 0, got {self.n_alpha!r}")
        if not (isinstance(self.f_ec, (int, float)) and self.f_ec >= 1.0 and math.isfinite(self.f_ec)):
            raise ValidationError(f"f_ec must be >= 1, got {self.f_ec!r}")


@dataclass(frozen=True, slots=True)
class LossSweep:
    """Symmetric channel-loss grid: total loss start..stop dB, eta_a = eta_b."""

    p_d: float
    e_d: float
    start_db: float
    stop_db: float
    points: int

    def __post_init__(self):
        ChannelParams(eta_a=0.0, eta_b=0.0, p_d=self.p_d, e_d=self.e_d)
        if not (math.isfinite(self.start_db) and math.isfinite(self.stop_db)):
            raise ValidationError("sweep bounds must be finite")
        if self.start_db < 0 or self.stop_db <= self.start_db:
            raise ValidationError("sweep needs 0 <= start_db < stop_db")
        if not (isinstance(self.points, int) and self.points >= 2):
            raise ValidationError(f"sweep points must be an integer >= 2, got {self.points!r}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start_db, self.stop_db, self.points)


@dataclass(frozen=True, slots=True)
class Scenario:
    """One executable configuration: channel (point or sweep), protocol,
    estimation settings, statistics mode, and RNG seed."""

    channel: object
    protocol: DecoyProtocol
    estimation: FluctuationConfig
    mode: str
    seed: int

    def __post_init__(self):
        if not isinstance(self.channel, (ChannelParams, LossSweep)):
            raise ValidationError("channel must be ChannelParams or LossSweep")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ValidationError(f"seed must be a nonnegative integer, got {self.seed!r}")


@dataclass(frozen=True, slots=True)
class KeyRateReport:
    """Everything run_point produces, with provenance per input."""

    bounds: DecoyBounds
    q11_z_lower: float
    e11_x_upper: float
    gain_z: float
    qber_z: float
    ec_cost: float
    rate_finite: float
    rate_raw: float
    rate_asymptotic: float
    y11_true: float
    e11_x_true: float
    flags: tuple
    provenance: tuple


@dataclass(frozen=True, slots=True)
class SweepPoint:
    """One loss-grid point: three rate curves plus the finite-data bounds."""

    total_loss_db: float
    eta_a: float
    eta_b: float
    rate_asymptotic: float
    rate_nalpha0: float
    rate_finite: float
    bounds: object
    note: str = ""


def _fmt(x: float) -> str:
    """CSV float format: 17 significant digits round-trips float64 exactly."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# scenario loading


def _require_keys(block: dict, allowed: set, required: set, where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ValidationError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    missing = required - set(block)
    if missing:
        raise ValidationError(f"missing key(s) in {where}: {', '.join(sorted(missing))}")


def scenario_from_dict(raw: dict) -> Scenario:
    """Build and validate a Scenario from parsed JSON. Strict keys throughout."""
    if not isinstance(raw, dict):
        raise ValidationError("scenario root must be a JSON object")
    _require_keys(raw, {"channel", "protocol", "estimation", "mode", "seed"}, {"channel", "protocol"}, "scenario")

    ch = raw["channel"]
    if not isinstance(ch, dict):
        raise ValidationError("channel must be an object")
    if "sweep" in ch:
        _require_keys(ch, {"p_d", "e_d", "sweep"}, {"p_d", "e_d", "sweep"}, "channel")
        sw = ch["sweep"]
        if not isinstance(sw, dict):
            raise ValidationError("channel.sweep must be an object")
        _require_keys(sw, {"start_db", "stop_db", "points"}, {"start_db", "stop_db", "points"}, "channel.sweep")
        if not isinstance(sw["points"], int):
            raise ValidationError("channel.sweep.points must be an integer")
        channel = LossSweep(
            p_d=float(ch["p_d"]),
            e_d=float(ch["e_d"]),
            start_db=float(sw["start_db"]),
            stop_db=float(sw["stop_db"]),
            points=sw["points"],
        )
    else:
        _require_keys(ch, {"eta_a", "eta_b", "p_d", "e_d"}, {"eta_a", "eta_b", "p_d", "e_d"}, "channel")
        channel = ChannelParams(
            eta_a=float(ch["eta_a"]),
            eta_b=float(ch["eta_b"]),
            p_d=float(ch["p_d"]),
            e_d=float(ch["e_d"]),
        )

    pr = raw["protocol"]
    if not isinstance(pr, dict):
        raise ValidationError("protocol must be an object")
    _require_keys(
        pr,
        {"intensities_a", "intensities_b", "signal_a", "signal_b", "n_data", "n_alpha", "f_ec"},
        {"intensities_a", "intensities_b"},
        "protocol",
    )
    ia = pr["intensities_a"]
    ib = pr["intensities_b"]
    if not isinstance(ia, list) or not isinstance(ib, list):
        raise ValidationError("intensity sets must be JSON arrays")
    protocol = DecoyProtocol(
        intensities_a=tuple(float(v) for v in ia),
        intensities_b=tuple(float(v) for v in ib),
        signal_a=pr.get("signal_a", len(ia) - 1),
        signal_b=pr.get("signal_b", len(ib) - 1),
        n_data=float(pr.get("n_data", DEFAULT_N_DATA)),
        n_alpha=float(pr.get("n_alpha", DEFAULT_N_ALPHA)),
        f_ec=float(pr.get("f_ec", DEFAULT_F_EC)),
    )

    est = raw.get("estimation", {})
    if not isinstance(est, dict):
        raise ValidationError("estimation must be an object")
    _require_keys(est, {"cutoff", "rigorous_tail", "zero_count_policy"}, set(), "estimation")
    if "cutoff" in est and not isinstance(est["cutoff"], int):
        raise ValidationError("estimation.cutoff must be an integer")
    if "rigorous_tail" in est and not isinstance(est["rigorous_tail"], bool):
        raise ValidationError("estimation.rigorous_tail must be a boolean")
    estimation = FluctuationConfig(
        n_alpha=protocol.n_alpha,
        cutoff=est.get("cutoff", 7),
        rigorous_tail=est.get("rigorous_tail", False),
        zero_count_policy=est.get("zero_count_policy", "poisson-upper"),
    )

    mode = raw.get("mode", "analytic")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ValidationError("seed must be an integer")
    return Scenario(channel=channel, protocol=protocol, estimation=estimation, mode=mode, seed=seed)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"scenario file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario file {path} is not valid JSON: {exc}")
    return scenario_from_dict(raw)


# ---------------------------------------------------------------------------
# statistics


def simulate_observed(scenario: Scenario) -> ObservedStats:
    """Expected (analytic) or sampled per-channel statistics.

    Sampled mode draws success counts Binomial(n_data, Q) and error counts
    Binomial(successes, E) from a PCG64 generator seeded with scenario.seed.
    Draw order is fixed: z basis before x, then row-major over (k, l).
    """
    channel = scenario.channel
    if not isinstance(channel, ChannelParams):
        raise ValidationError("simulate_observed needs a point channel, not a sweep")
    proto = scenario.protocol
    rng = None
    n_pulses = proto.n_data
    if scenario.mode == "sampled":
        if abs(proto.n_data - round(proto.n_data)) > 0:
            raise ValidationError("sampled mode needs an integer n_data")
        n_pulses = int(round(proto.n_data))
        rng = np.random.Generator(np.random.PCG64(scenario.seed))
    entries = []
    for basis, fn in (("z", gain_qber_z), ("x", gain_qber_x)):
        for k, mu in enumerate(proto.intensities_a):
            for l, nu in enumerate(proto.intensities_b):
                gq = fn(channel, mu, nu)
                if rng is None:
                    gain, qber = gq.gain, gq.qber
                else:
                    successes = int(rng.binomial(n_pulses, gq.gain))
                    errors = int(rng.binomial(successes, gq.qber)) if successes else 0
                    gain = successes / n_pulses
                    qber = errors / successes if successes else E0
                entries.append(
                    ObservedEntry(
                        basis=basis, k=k, l=l, mu=mu, nu=nu,
                        pulses=float(proto.n_data), gain=gain, qber=qber,
                    )
                )
    return ObservedStats(tuple(entries))


def ingest_counts(path: str) -> ObservedStats:
    """Read a counts CSV (integer counts) into ObservedStats.

    Rejects, naming the row: malformed fields, duplicate (basis, k, l) keys,
    errors > successes, successes > pulses. Rates are the count ratios;
    a channel with zero successes reports QBER = 1/2 by convention.
    """
    try:
        fh = open(path, encoding="utf-8", newline="")
    except FileNotFoundError:
        raise ValidationError(f"counts file not found: {path}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"counts file {path} is empty")
        if tuple(header) != COUNTS_HEADER:
            raise ValidationError(
                f"counts file {path} must start with header {','.join(COUNTS_HEADER)}"
            )
        entries = []
        seen = set()
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(COUNTS_HEADER):
                raise ValidationError(f"{path}:{row_no}: expected {len(COUNTS_HEADER)} fields, got {len(row)}")
            basis, k_s, l_s, mu_s, nu_s, pulses_s, succ_s, err_s = row
            try:
                k, l = int(k_s), int(l_s)
                mu, nu = float(mu_s), float(nu_s)
                pulses, successes, errors = int(pulses_s), int(succ_s), int(err_s)
            except ValueError:
                raise ValidationError(f"{path}:{row_no}: malformed numeric field")
            if basis not in ("x", "z"):
                raise ValidationError(f"{path}:{row_no}: basis must be x or z, got {basis!r}")
            if pulses <= 0:
                raise ValidationError(f"{path}:{row_no}: pulses must be positive")
            if not 0 <= errors <= successes <= pulses:
                raise ValidationError(
                    f"{path}:{row_no}: need 0 <= errors <= successes <= pulses, "
                    f"got errors={errors} successes={successes} pulses={pulses}"
                )
            key = (basis, k, l)
            if key in seen:
                raise ValidationError(f"{path}:{row_no}: duplicate entry for (basis, k, l) = {key}")
            seen.add(key)
            entries.append(
                ObservedEntry(
                    basis=basis, k=k, l=l, mu=mu, nu=nu,
                    pulses=float(pulses),
                    gain=successes / pulses,
                    qber=errors / successes if successes else E0,
                )
            )
    if not entries:
        raise ValidationError(f"counts file {path} has no data rows")
    return ObservedStats(tuple(entries))


# ---------------------------------------------------------------------------
# execution


def _asymptotic_reference(channel: ChannelParams, proto: DecoyProtocol) -> tuple[float, float, float]:
    """(rate, Y11, e11_x) from the closed-form single-photon statistics."""
    y11, e11_x, _ = single_photon_stats(channel)
    mu_s = proto.intensities_a[proto.signal_a]
    nu_s = proto.intensities_b[proto.signal_b]
    gq = gain_qber_z(channel, mu_s, nu_s)
    rate = (
        q11(mu_s, nu_s, y11) * (1.0 - binary_entropy(min(e11_x, 0.5)))
        - gq.gain * proto.f_ec * binary_entropy(gq.qber)
    )
    return max(0.0, rate), y11, e11_x


def run_point(
    scenario: Scenario,
    observed: ObservedStats | None = None,
    source: str | None = None,
) -> KeyRateReport:
    """Chain statistics -> estimation -> key rate for one channel point.

    Pass observed to analyze external statistics; otherwise they are
    simulated from the scenario. source labels the provenance lines.
    """
    channel = scenario.channel
    if not isinstance(channel, ChannelParams):
        raise ValidationError("run_point needs a point channel, not a sweep")
    proto = scenario.protocol
    if observed is None:
        observed = simulate_observed(scenario)
        if source is None:
            source = f"simulated ({scenario.mode}, seed {scenario.seed})"
    elif source is None:
        source = "ingested counts"
    mu_s = proto.intensities_a[proto.signal_a]
    nu_s = proto.intensities_b[proto.signal_b]
    signal = observed.get(proto.signal_a, proto.signal_b, "z")
    if signal is None:
        raise ValidationError(
            f"observed stats lack the z-basis signal channel (k={proto.signal_a}, l={proto.signal_b})"
        )
    bounds = estimate(observed, scenario.estimation)
    q11_lower = q11(mu_s, nu_s, bounds.y11_z_lower)
    breakdown = key_rate_breakdown(
        KeyRateInputs(
            q11_z=q11_lower,
            e11_x=bounds.e11_x_upper,
            gain_z=signal.gain,
            qber_z=signal.qber,
            f_ec=proto.f_ec,
        )
    )
    rate_asym, y11_true, e11_x_true = _asymptotic_reference(channel, proto)
    provenance = (
        ("observed_stats", source),
        ("q11_z_lower", f"lp bound y11_z lower at signal pair ({_fmt(mu_s)}, {_fmt(nu_s)})"),
        ("e11_x_upper", "lp bound ey11_x upper / y11_x lower"),
        ("gain_z", f"observed signal channel, {source}"),
        ("qber_z", f"observed signal channel, {source}"),
        ("f_ec", "protocol config"),
        ("rate_asymptotic", "closed-form single-photon reference (config channel)"),
    )
    return KeyRateReport(
        bounds=bounds,
        q11_z_lower=q11_lower,
        e11_x_upper=bounds.e11_x_upper,
        gain_z=signal.gain,
        qber_z=signal.qber,
        ec_cost=breakdown.ec_cost,
        rate_finite=breakdown.rate,
        rate_raw=breakdown.raw,
        rate_asymptotic=rate_asym,
        y11_true=y11_true,
        e11_x_true=e11_x_true,
        flags=tuple(bounds.flags) + tuple(breakdown.flags),
        provenance=provenance,
    )


def _with_n_alpha(scenario: Scenario, n_alpha: float) -> Scenario:
    return replace(
        scenario,
        protocol=replace(scenario.protocol, n_alpha=n_alpha),
        estimation=replace(scenario.estimation, n_alpha=n_alpha),
    )


def run_sweep(scenario: Scenario, loss_grid=None) -> list:
    """run_point across a loss grid; emits three curves per point.

    Per-point estimation failures are recorded in the point's note and the
    sweep continues. Points are ordered by grid index.
    """
    if loss_grid is None:
        if not isinstance(scenario.channel, LossSweep):
            raise ValidationError("run_sweep needs a sweep channel or an explicit loss grid")
        loss_grid = scenario.channel.grid()
        p_d, e_d = scenario.channel.p_d, scenario.channel.e_d
    elif isinstance(scenario.channel, LossSweep):
        p_d, e_d = scenario.channel.p_d, scenario.channel.e_d
    else:
        p_d, e_d = scenario.channel.p_d, scenario.channel.e_d
    points = []
    for db in np.asarray(loss_grid, dtype=float):
        eta = 10.0 ** (-db / 20.0)
        channel = ChannelParams(eta_a=eta, eta_b=eta, p_d=p_d, e_d=e_d)
        point_scenario = replace(scenario, channel=channel)
        try:
            report = run_point(point_scenario)
            report0 = run_point(_with_n_alpha(point_scenario, 0.0))
            points.append(
                SweepPoint(
                    total_loss_db=float(db),
                    eta_a=eta,
                    eta_b=eta,
                    rate_asymptotic=report.rate_asymptotic,
                    rate_nalpha0=report0.rate_finite,
                    rate_finite=report.rate_finite,
                    bounds=report.bounds,
                )
            )
        except InfeasibleError as exc:
            points.append(
                SweepPoint(
                    total_loss_db=float(db),
                    eta_a=eta,
                    eta_b=eta,
                    rate_asymptotic=float("nan"),
                    rate_nalpha0=float("nan"),
                    rate_finite=float("nan"),
                    bounds=None,
                    note=f"infeasible: {exc}",
                )
            )
    return points


# ---------------------------------------------------------------------------
# output


def write_gains_csv(obs: ObservedStats, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("basis,k,l,mu,nu,gain\n")
        for e in obs.entries:
            fh.write(f"{e.basis},{e.k},{e.l},{_fmt(e.mu)},{_fmt(e.nu)},{_fmt(e.gain)}\n")


def write_qbers_csv(obs: ObservedStats, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("basis,k,l,mu,nu,qber\n")
        for e in obs.entries:
            fh.write(f"{e.basis},{e.k},{e.l},{_fmt(e.mu)},{_fmt(e.nu)},{_fmt(e.qber)}\n")


def write_counts_csv(obs: ObservedStats, path: str) -> None:
    """Counts CSV for re-ingestion. Only exact integer counts are writable;
    analytic rates generally are not, so this is a sampled-mode output."""
    rows = []
    for e in obs.entries:
        pulses = e.pulses
        successes = e.gain * pulses
        errors = e.qber * successes
        for name, v in (("pulses", pulses), ("successes", successes), ("errors", errors)):
            # Counts are stored as rates, so reconstruction carries float
            # error proportional to the count; scale the tolerance to match.
            if abs(v - round(v)) > 1e-9 * max(1.0, abs(v)):
                raise ValidationError(
                    f"cannot write counts CSV: {name} for (basis={e.basis}, k={e.k}, l={e.l}) "
                    f"is not an integer ({v!r})"
                )
        rows.append((e.basis, e.k, e.l, e.mu, e.nu, round(pulses), round(successes), round(errors)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(COUNTS_HEADER) + "\n")
        for basis, k, l, mu, nu, pulses, successes, errors in rows:
            fh.write(f"{basis},{k},{l},{_fmt(mu)},{_fmt(nu)},{pulses},{successes},{errors}\n")


def write_bounds_csv(bounds: DecoyBounds, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("quantity,lower,upper\n")
        for name in ("y11_z", "y11_x", "ey11_z", "ey11_x", "e11_z", "e11_x"):
            lo = getattr(bounds, f"{name}_lower")
            hi = getattr(bounds, f"{name}_upper")
            fh.write(f"{name},{_fmt(lo)},{_fmt(hi)}\n")


def write_sweep_csv(points: list, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("loss_db,eta_a,eta_b,rate_asymptotic,rate_nalpha0,rate_finite,y11_z_lower,e11_x_upper\n")
        for p in points:
            y11_lo = p.bounds.y11_z_lower if p.bounds is not None else float("nan")
            e11_up = p.bounds.e11_x_upper if p.bounds is not None else float("nan")
            fh.write(
                f"{_fmt(p.total_loss_db)},{_fmt(p.eta_a)},{_fmt(p.eta_b)},"
                f"{_fmt(p.rate_asymptotic)},{_fmt(p.rate_nalpha0)},{_fmt(p.rate_finite)},"
                f"{_fmt(y11_lo)},{_fmt(e11_up)}\n"
            )


def _scenario_lines(scenario: Scenario) -> list:
    proto = scenario.protocol
    lines = []
    ch = scenario.channel
    if isinstance(ch, ChannelParams):
        lines.append(
            f"channel: eta_a={ch.eta_a:.6g} eta_b={ch.eta_b:.6g} p_d={ch.p_d:.6g} e_d={ch.e_d:.6g}"
        )
    else:
        lines.append(
            f"channel sweep: {ch.start_db:.6g}..{ch.stop_db:.6g} dB total loss, {ch.points} points, "
            f"p_d={ch.p_d:.6g} e_d={ch.e_d:.6g}"
        )
    lines.append(
        "intensities A: " + ", ".join(f"{v:g}" for v in proto.intensities_a)
        + f" (signal index {proto.signal_a})"
    )
    lines.append(
        "intensities B: " + ", ".join(f"{v:g}" for v in proto.intensities_b)
        + f" (signal index {proto.signal_b})"
    )
    lines.append(
        f"n_data per (pair, basis): {proto.n_data:.6g}   n_alpha: {proto.n_alpha:.6g}   "
        f"f_ec: {proto.f_ec:.6g}"
    )
    est = scenario.estimation
    lines.append(
        f"cutoff: {est.cutoff}   rigorous_tail: {est.rigorous_tail}   "
        f"zero_count_policy: {est.zero_count_policy}"
    )
    lines.append(f"mode: {scenario.mode}   seed: {scenario.seed}")
    return lines


def write_point_report(
    scenario: Scenario, report: KeyRateReport, path: str, include_rate: bool = True
) -> None:
    b = report.bounds
    lines = ["decoy-state MDI-QKD finite-data analysis", ""]
    lines += _scenario_lines(scenario)
    lines += [
        "",
        "estimated bounds (1+1 channel):",
        f"  y11_z  in [{report.bounds.y11_z_lower:.6e}, {b.y11_z_upper:.6e}]",
        f"  y11_x  in [{b.y11_x_lower:.6e}, {b.y11_x_upper:.6e}]",
        f"  e11_z  in [{b.e11_z_lower:.6e}, {b.e11_z_upper:.6e}]",
        f"  e11_x  in [{b.e11_x_lower:.6e}, {b.e11_x_upper:.6e}]",
        f"  asymptotic reference: Y11={report.y11_true:.6e} e11_x={report.e11_x_true:.6e}",
    ]
    if include_rate:
        lines += [
            "",
            "key rate (bits per signal-pair pulse, z basis):",
            f"  q11_z lower bound    = {report.q11_z_lower:.6e}",
            f"  e11_x upper bound    = {report.e11_x_upper:.6e}",
            f"  signal gain_z        = {report.gain_z:.6e}",
            f"  signal qber_z        = {report.qber_z:.6e}",
            f"  error-correction cost= {report.ec_cost:.6e}",
            f"  rate (finite, clamped) = {report.rate_finite:.6e}",
            f"  rate (raw)             = {report.rate_raw:.6e}",
            f"  rate (asymptotic ref)  = {report.rate_asymptotic:.6e}",
        ]
    lines += [
        "",
        "flags: " + (", ".join(report.flags) if report.flags else "none"),
        "provenance:",
    ]
    lines += [f"  {name}: {src}" for name, src in report.provenance]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_report(scenario: Scenario, points: list, path: str) -> None:
    def cutoff_db(rates):
        positive = [p.total_loss_db for p, r in zip(points, rates) if r > 0]
        return f"{max(positive):.6g} dB" if positive else "none"

    lines = ["decoy-state MDI-QKD loss sweep", ""]
    lines += _scenario_lines(scenario)
    finite = [p.rate_finite for p in points]
    nalpha0 = [p.rate_nalpha0 for p in points]
    asym = [p.rate_asymptotic for p in points]
    lines += [
        "",
        f"grid points: {len(points)}",
        f"last positive asymptotic rate: {cutoff_db(asym)}",
        f"last positive rate at n_alpha=0: {cutoff_db(nalpha0)}",
        f"last positive rate at configured n_alpha: {cutoff_db(finite)}",
    ]
    failed = [p for p in points if p.note]
    if failed:
        lines.append("")
        lines.append("points with estimation failures:")
        lines += [f"  {p.total_loss_db:.6g} dB: {p.note}" for p in failed]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def render_bounds_figure(report: KeyRateReport, path: str) -> None:
    """Interval plot of the estimated bounds next to the asymptotic truth."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    b = report.bounds
    fig, (ax_y, ax_e) = plt.subplots(1, 2, figsize=(8.0, 3.6), dpi=150)
    for ax, pairs, truth, title in (
        (ax_y, [("y11_z", b.y11_z_lower, b.y11_z_upper), ("y11_x", b.y11_x_lower, b.y11_x_upper)],
         report.y11_true, "single-photon yield"),
        (ax_e, [("e11_z", b.e11_z_lower, b.e11_z_upper), ("e11_x", b.e11_x_lower, b.e11_x_upper)],
         report.e11_x_true, "single-photon error rate"),
    ):
        xs = range(len(pairs))
        for x, (name, lo, hi) in zip(xs, pairs):
            ax.plot([x, x], [lo, hi], marker="_", markersize=14, linewidth=2, color="tab:blue")
        ax.axhline(truth, color="tab:red", linewidth=1, linestyle="--", label="asymptotic")
        ax.set_xticks(list(xs), [p[0] for p in pairs])
        ax.set_xlim(-0.6, len(pairs) - 0.4)
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_sweep_figure(points: list, n_alpha: float, path: str) -> None:
    """Semilog rate-versus-loss plot of the three sweep curves."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    db = [p.total_loss_db for p in points]

    def positive(rates):
        return [r if r > 0 else float("nan") for r in rates]

    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=150)
    ax.semilogy(db, positive([p.rate_asymptotic for p in points]), label="asymptotic", color="tab:gray")
    ax.semilogy(db, positive([p.rate_nalpha0 for p in points]), label="n_alpha = 0", color="tab:blue")
    ax.semilogy(db, positive([p.rate_finite for p in points]), label=f"n_alpha = {n_alpha:g}", color="tab:red")
    ax.set_xlabel("total channel loss (dB)")
    ax.set_ylabel("key rate (bits per signal-pair pulse)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# ---------------------------------------------------------------------------
# CLI


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    if args.n_alpha is not None:
        scenario = _with_n_alpha(scenario, args.n_alpha)
    if args.cutoff is not None:
        scenario = replace(scenario, estimation=replace(scenario.estimation, cutoff=args.cutoff))
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    if args.sampled:
        scenario = replace(scenario, mode="sampled")
    return scenario


def _observed_for(scenario: Scenario, args) -> tuple[ObservedStats, str]:
    if args.counts is not None:
        return ingest_counts(args.counts), f"ingested counts ({args.counts})"
    return simulate_observed(scenario), f"simulated ({scenario.mode}, seed {scenario.seed})"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdiqkd",
        description="Finite-data decoy-state MDI-QKD analysis: simulate statistics, "
        "bound single-photon yields via LP, compute key rates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "write per-channel gains and QBERs (counts too in sampled mode)"),
        ("estimate", "bound Y11 and e11 from observed statistics"),
        ("keyrate", "full chain: statistics, bounds, key rate"),
        ("sweep", "key rate across a channel-loss grid"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--counts", default=None, help="counts CSV to ingest instead of simulating")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--n-alpha", dest="n_alpha", type=float, default=None, help="override n_alpha")
        p.add_argument("--cutoff", type=int, default=None, help="override photon-number cutoff")
        p.add_argument("--seed", type=int, default=None, help="override RNG seed (sampled mode)")
        p.add_argument("--sampled", action="store_true", help="force sampled statistics mode")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scenario = _apply_overrides(load_scenario(args.config), args)
        os.makedirs(args.out, exist_ok=True)
        out = lambda name: os.path.join(args.out, name)  # noqa: E731

        if args.command == "simulate":
            obs, _ = _observed_for(scenario, args)
            write_gains_csv(obs, out("gains.csv"))
            write_qbers_csv(obs, out("qbers.csv"))
            if scenario.mode == "sampled" and args.counts is None:
                write_counts_csv(obs, out("counts.csv"))
            return 0

        if args.command in ("estimate", "keyrate"):
            obs, source = _observed_for(scenario, args)
            report = run_point(scenario, observed=obs, source=source)
            write_gains_csv(obs, out("gains.csv"))
            write_qbers_csv(obs, out("qbers.csv"))
            if scenario.mode == "sampled" and args.counts is None:
                write_counts_csv(obs, out("counts.csv"))
            write_bounds_csv(report.bounds, out("bounds.csv"))
            write_point_report(
                scenario, report, out("report.txt"), include_rate=args.command == "keyrate"
            )
            render_bounds_figure(report, out("bounds.png"))
            return 0

        points = run_sweep(scenario)
        write_sweep_csv(points, out("sweep.csv"))
        write_sweep_report(scenario, points, out("report.txt"))
        render_sweep_figure(points, scenario.protocol.n_alpha, out("sweep.png"))
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"estimation infeasible: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
