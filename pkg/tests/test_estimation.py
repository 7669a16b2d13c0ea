"""LP estimation of single-photon bounds from observed statistics."""
import dataclasses
import math

import pytest

from helpers import analytic_stats
from mdiqkd import (
    ChannelParams,
    FluctuationConfig,
    InfeasibleError,
    ObservedEntry,
    ObservedStats,
    ValidationError,
    bound_ey11_upper,
    bound_y11,
    build_constraints,
    estimate,
    fluctuation_ratios,
    single_photon_stats,
)

VW = (0.0, 0.1, 0.5)
V2W = (0.0, 0.1, 0.2, 0.5)
CFG = FluctuationConfig(n_alpha=5.0, cutoff=7)

# Regression references computed with an independent LP code (interior-point
# with presolve disabled and 1e-12 tolerances) on the same constraint system;
# agreement limited by each solver's termination tolerance, hence 1e-4.
REF_VW = {
    "y11_z_lower": 4.604342633421e-3,
    "y11_z_upper": 6.028575602128e-3,
    "y11_x_lower": 4.134335019094e-3,
    "y11_x_upper": 6.633386255540e-3,
    "e11_z_lower": 9.555743855008e-3,
    "e11_z_upper": 2.134117312028e-2,
    "e11_x_upper": 1.021256890335e-1,
}
REF_V2W = {
    "y11_z_lower": 4.705763923120e-3,
    "y11_z_upper": 5.237731539221e-3,
    "y11_x_lower": 4.373380623646e-3,
    "y11_x_upper": 5.564014127696e-3,
    "e11_z_lower": 1.110326575826e-2,
    "e11_z_upper": 2.040947707995e-2,
    "e11_x_upper": 7.795407009181e-2,
}


def entry(**kwargs):
    base = dict(basis="z", k=0, l=0, mu=0.1, nu=0.1, pulses=1e10, gain=1e-4, qber=0.02)
    base.update(kwargs)
    return ObservedEntry(**base)


class TestObservedEntry:
    def test_rejects_bad_basis(self):
        with pytest.raises(ValidationError):
            entry(basis="y")

    def test_rejects_negative_index(self):
        with pytest.raises(ValidationError):
            entry(k=-1)

    def test_rejects_rate_outside_unit(self):
        with pytest.raises(ValidationError):
            entry(gain=1.2)
        with pytest.raises(ValidationError):
            entry(qber=-0.1)

    def test_rejects_nonpositive_pulses(self):
        with pytest.raises(ValidationError):
            entry(pulses=0)


class TestObservedStats:
    def test_duplicate_key_rejected(self):
        with pytest.raises(ValidationError):
            ObservedStats((entry(), entry(gain=2e-4)))

    def test_lookup(self):
        stats = ObservedStats((entry(), entry(basis="x", gain=3e-4)))
        assert stats.get(0, 0, "x").gain == 3e-4
        assert stats.get(1, 0, "z") is None
        assert len(stats.for_basis("z")) == 1

    def test_intensities(self):
        stats = ObservedStats((entry(), entry(k=1, mu=0.5), entry(basis="x", nu=0.3)))
        mus, nus = stats.intensities()
        assert mus == (0.1, 0.5)
        assert nus == (0.1, 0.3)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            ObservedStats(())


class TestFluctuationConfig:
    def test_defaults(self):
        cfg = FluctuationConfig(n_alpha=5.0)
        assert cfg.cutoff == 7 and not cfg.rigorous_tail

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n_alpha=-1.0),
            dict(n_alpha=5.0, cutoff=1),
            dict(n_alpha=5.0, zero_count_policy="drop"),
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValidationError):
            FluctuationConfig(**kwargs)


class TestFluctuationRatios:
    def test_frozen_value(self):
        beta_q, _ = fluctuation_ratios(2e10, 4.9374e-5, 0.016164, 5.0)
        assert beta_q == pytest.approx(5.0315970074053555e-3, rel=1e-12)

    def test_error_band_wider(self):
        beta_q, beta_eq = fluctuation_ratios(1e10, 1e-4, 0.02, 5.0)
        assert beta_eq == pytest.approx(beta_q / math.sqrt(0.02), rel=1e-12)
        assert beta_eq > beta_q

    def test_zero_n_alpha(self):
        assert fluctuation_ratios(1e10, 1e-4, 0.02, 0.0) == (0.0, 0.0)

    def test_zero_counts_are_infinite(self):
        beta_q, beta_eq = fluctuation_ratios(1e10, 0.0, 0.0, 5.0)
        assert math.isinf(beta_q) and math.isinf(beta_eq)
        _, beta_eq = fluctuation_ratios(1e10, 1e-4, 0.0, 5.0)
        assert math.isinf(beta_eq)

    def test_rejects(self):
        with pytest.raises(ValidationError):
            fluctuation_ratios(0.0, 1e-4, 0.02, 5.0)


class TestBuildConstraints:
    def test_two_rows_per_channel(self):
        obs = analytic_stats(0.1, VW)
        rows = build_constraints(obs, CFG, "z", "gain")
        assert len(rows) == 18  # 9 channels, upper + lower each
        for coeffs, relation, rhs in rows:
            assert len(coeffs) == 49
            assert relation in ("<=", ">=")
            assert rhs >= 0.0

    def test_band_ordering(self):
        obs = analytic_stats(0.1, VW)
        rows = build_constraints(obs, CFG, "z", "gain")
        for upper, lower in zip(rows[0::2], rows[1::2]):
            assert upper[1] == "<=" and lower[1] == ">="
            assert upper[2] > lower[2]

    def test_zero_count_gets_single_policy_row(self):
        silent = ObservedStats(
            (
                entry(gain=0.0, qber=0.0),
                entry(k=1, mu=0.5, gain=1e-4),
            )
        )
        rows = build_constraints(silent, CFG, "z", "gain")
        assert len(rows) == 3
        coeffs, relation, rhs = rows[0]
        assert relation == "<="
        assert rhs == pytest.approx(25.0 / 1e10, rel=1e-12)

    def test_rigorous_tail_widens_both_sides(self):
        # The slack is tau(mu) + tau(nu), so it vanishes only for the
        # vacuum-vacuum entry; every other row must widen strictly.
        obs = analytic_stats(0.1, VW)
        plain = build_constraints(obs, CFG, "z", "gain")
        widened = build_constraints(
            obs, dataclasses.replace(CFG, rigorous_tail=True), "z", "gain"
        )
        strict = 0
        for (_, rel_p, rhs_p), (_, rel_w, rhs_w) in zip(plain, widened):
            assert rel_p == rel_w
            if rel_p == "<=":
                assert rhs_w >= rhs_p
                strict += rhs_w > rhs_p
            else:
                assert rhs_w <= rhs_p
        upper_rows = sum(1 for _, rel, _ in plain if rel == "<=")
        assert strict == upper_rows - 1

    def test_error_gain_uses_product_rate(self):
        obs = ObservedStats((entry(),))
        gain_rows = build_constraints(obs, CFG, "z", "gain")
        err_rows = build_constraints(obs, CFG, "z", "error_gain")
        assert err_rows[0][2] < gain_rows[0][2]

    def test_rejects_unknown_basis_or_kind(self):
        obs = ObservedStats((entry(),))
        with pytest.raises(ValidationError):
            build_constraints(obs, CFG, "q", "gain")
        with pytest.raises(ValidationError):
            build_constraints(obs, CFG, "z", "qber")
        with pytest.raises(ValidationError):
            build_constraints(obs, CFG, "x", "gain")  # no x entries


class TestBounds:
    def test_vacuum_weak_reference(self):
        obs = analytic_stats(0.1, VW)
        bounds = estimate(obs, CFG)
        for name, want in REF_VW.items():
            assert getattr(bounds, name) == pytest.approx(want, rel=1e-4), name

    def test_vacuum_two_weak_reference(self):
        obs = analytic_stats(0.1, V2W)
        bounds = estimate(obs, CFG)
        for name, want in REF_V2W.items():
            assert getattr(bounds, name) == pytest.approx(want, rel=1e-4), name

    def test_direct_bound_calls_match_estimate(self):
        obs = analytic_stats(0.1, VW)
        bounds = estimate(obs, CFG)
        assert bound_y11(obs, CFG, "z", "lower") == bounds.y11_z_lower
        assert bound_y11(obs, CFG, "z", "upper") == bounds.y11_z_upper
        assert bound_ey11_upper(obs, CFG, "x") == bounds.ey11_x_upper

    def test_interval_structure(self):
        bounds = estimate(analytic_stats(0.1, VW), CFG)
        for name in ("y11_z", "y11_x", "ey11_z", "ey11_x", "e11_z", "e11_x"):
            lo = getattr(bounds, f"{name}_lower")
            hi = getattr(bounds, f"{name}_upper")
            assert 0.0 <= lo <= hi <= 1.0, name
        assert len(bounds.lp_status) == 8
        assert all(status == "optimal" for _, status in bounds.lp_status)
        assert bounds.flags == ()

    def test_rigorous_tail_contains_truth(self):
        channel = ChannelParams(eta_a=0.1, eta_b=0.1, p_d=3e-6, e_d=0.015)
        y11, e11_x, e11_z = single_photon_stats(channel)
        cfg = dataclasses.replace(CFG, rigorous_tail=True)
        bounds = estimate(analytic_stats(0.1, VW), cfg)
        assert bounds.y11_z_lower <= y11 <= bounds.y11_z_upper
        assert bounds.y11_x_lower <= y11 <= bounds.y11_x_upper
        assert bounds.e11_z_lower <= e11_z <= bounds.e11_z_upper
        assert bounds.e11_x_lower <= e11_x <= bounds.e11_x_upper

    def test_bad_direction_rejected(self):
        with pytest.raises(ValidationError):
            bound_y11(analytic_stats(0.1, VW), CFG, "z", "min")

    def test_zero_n_alpha_still_feasible(self):
        bounds = estimate(analytic_stats(0.1, VW), FluctuationConfig(n_alpha=0.0))
        assert bounds.y11_z_lower <= bounds.y11_z_upper
        assert bounds.y11_z_upper - bounds.y11_z_lower > 0.0


class TestDegenerateScenarios:
    def test_contradictory_stats_raise(self):
        conflicting = ObservedStats(
            (
                entry(mu=0.0, nu=0.0, gain=0.5, qber=0.1),
                entry(k=1, mu=0.0, nu=0.1, gain=1e-8, qber=0.1),
                entry(k=2, mu=0.5, nu=0.5, gain=1e-4, qber=0.1),
            )
        )
        with pytest.raises(InfeasibleError) as excinfo:
            estimate(conflicting, CFG)
        assert excinfo.value.constraints is not None

    def test_single_intensity_flagged_vacuous(self):
        lone = ObservedStats(
            (
                entry(),
                entry(basis="x", gain=2e-4, qber=0.25),
            )
        )
        bounds = estimate(lone, CFG)
        assert "vacuous_intensities" in bounds.flags
        # one band cannot separate the single-photon term: bounds collapse
        # to the box and the error bound saturates
        assert bounds.y11_z_lower == pytest.approx(0.0, abs=1e-12)
        assert bounds.e11_x_upper == 1.0
        assert "e11_x_vacuous" in bounds.flags

    def test_widening_in_n_alpha(self):
        obs = analytic_stats(0.1, VW)
        tight = estimate(obs, FluctuationConfig(n_alpha=3.0))
        loose = estimate(obs, FluctuationConfig(n_alpha=6.0))
        eps = 1e-12
        assert loose.y11_z_lower <= tight.y11_z_lower + eps
        assert loose.y11_z_upper >= tight.y11_z_upper - eps
        assert loose.e11_x_upper >= tight.e11_x_upper - eps

    def test_tightening_in_decoy_count(self):
        vw = estimate(analytic_stats(0.1, VW), CFG)
        v2w = estimate(analytic_stats(0.1, V2W), CFG)
        eps = 1e-12
        assert v2w.y11_z_lower >= vw.y11_z_lower - eps
        assert v2w.y11_z_upper <= vw.y11_z_upper + eps
        assert v2w.e11_x_upper <= vw.e11_x_upper + eps
