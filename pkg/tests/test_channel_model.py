"""Closed-form detection statistics: oracle values, symmetries, edge cases."""
import math

import pytest

from mdiqkd import (
    ChannelParams,
    ValidationError,
    aux_vars,
    bessel_i0,
    gain_qber_x,
    gain_qber_z,
    q11,
    single_photon_stats,
)

TABLE = ChannelParams(eta_a=0.1, eta_b=0.1, p_d=3e-6, e_d=0.015)

# High-precision references computed offline with mpmath (50 digits).
I0_ORACLE = {
    0.0: 1.0,
    0.05: 1.000625097663031949,
    1.0: 1.2660658777520083356,
    20.0: 43558282.559553533272,
}


class TestBesselI0:
    def test_oracle_values(self):
        for z, want in I0_ORACLE.items():
            assert bessel_i0(z) == pytest.approx(want, rel=1e-13)

    def test_even_growth(self):
        values = [bessel_i0(z) for z in (0.0, 0.5, 1.0, 2.0, 5.0)]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[0] == 1.0

    @pytest.mark.parametrize("bad", [-0.1, float("nan"), float("inf"), None, "1"])
    def test_rejects_bad_argument(self, bad):
        with pytest.raises(ValidationError):
            bessel_i0(bad)


class TestChannelParams:
    def test_valid(self):
        p = ChannelParams(eta_a=0.0, eta_b=1.0, p_d=0.0, e_d=0.499)
        assert p.eta_b == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(eta_a=-0.1, eta_b=0.1, p_d=0.0, e_d=0.01),
            dict(eta_a=0.1, eta_b=1.1, p_d=0.0, e_d=0.01),
            dict(eta_a=0.1, eta_b=0.1, p_d=float("nan"), e_d=0.01),
            dict(eta_a=0.1, eta_b=0.1, p_d=0.0, e_d=0.5),
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValidationError):
            ChannelParams(**kwargs)


class TestAuxVars:
    def test_values(self):
        av = aux_vars(TABLE, 0.5, 0.5)
        assert av.mu_prime == pytest.approx(0.1, rel=1e-15)
        assert av.x_var == pytest.approx(0.025, rel=1e-15)
        assert av.y_var == pytest.approx((1 - 3e-6) * math.exp(-0.025), rel=1e-15)

    def test_rejects_negative_intensity(self):
        with pytest.raises(ValidationError):
            aux_vars(TABLE, -0.1, 0.1)


class TestGainQber:
    def test_symmetric_under_intensity_swap(self):
        # with eta_a = eta_b the channel is symmetric in (mu, nu)
        for fn in (gain_qber_x, gain_qber_z):
            a = fn(TABLE, 0.1, 0.5)
            b = fn(TABLE, 0.5, 0.1)
            assert a.gain == pytest.approx(b.gain, rel=1e-14)
            assert a.qber == pytest.approx(b.qber, rel=1e-14)

    def test_vacuum_vacuum_is_dark_count_driven(self):
        for fn in (gain_qber_x, gain_qber_z):
            gq = fn(TABLE, 0.0, 0.0)
            # two independent dark counts, ~2 p_d^2 coincidence windows
            assert gq.gain == pytest.approx(3.60e-11, rel=2e-3)
            assert gq.qber == pytest.approx(0.5, abs=1e-6)

    def test_zero_everything_gives_e0_qber(self):
        silent = ChannelParams(eta_a=0.0, eta_b=0.0, p_d=0.0, e_d=0.015)
        for fn in (gain_qber_x, gain_qber_z):
            gq = fn(silent, 0.5, 0.5)
            assert gq.gain == 0.0
            assert gq.qber == 0.5

    def test_gain_monotone_in_intensity(self):
        gains = [gain_qber_z(TABLE, mu, 0.1).gain for mu in (0.0, 0.1, 0.3, 0.5)]
        assert all(b > a for a, b in zip(gains, gains[1:]))

    def test_qber_ranges(self):
        for fn in (gain_qber_x, gain_qber_z):
            for mu in (0.0, 0.1, 0.5):
                for nu in (0.0, 0.1, 0.5):
                    gq = fn(TABLE, mu, nu)
                    assert 0.0 <= gq.qber <= 0.5
                    assert gq.gain >= 0.0


class TestSinglePhotonStats:
    def test_frozen_values(self):
        y11, e11_x, e11_z = single_photon_stats(TABLE)
        assert y11 == pytest.approx(5.0010800225e-3, rel=1e-9)
        assert e11_x == pytest.approx(1.5107648930e-2, rel=1e-9)
        assert e11_z == pytest.approx(1.5110558284e-2, rel=1e-9)

    def test_z_error_exceeds_x_error(self):
        # the z-basis error subtracts less signal correlation whenever dark
        # counts are present, so e11_z >= e11_x with equality only at p_d = 0
        _, e11_x, e11_z = single_photon_stats(TABLE)
        assert e11_z > e11_x
        clean = ChannelParams(eta_a=0.1, eta_b=0.1, p_d=0.0, e_d=0.015)
        _, ex0, ez0 = single_photon_stats(clean)
        assert ex0 == pytest.approx(ez0, rel=1e-15)

    def test_no_dark_counts_reduces_to_misalignment(self):
        clean = ChannelParams(eta_a=0.2, eta_b=0.3, p_d=0.0, e_d=0.0123)
        y11, e11_x, e11_z = single_photon_stats(clean)
        assert y11 == pytest.approx(0.2 * 0.3 / 2.0, rel=1e-15)
        assert e11_x == pytest.approx(0.0123, rel=1e-12)
        assert e11_z == pytest.approx(0.0123, rel=1e-12)

    def test_dead_channel(self):
        dead = ChannelParams(eta_a=0.0, eta_b=0.0, p_d=0.0, e_d=0.015)
        assert single_photon_stats(dead) == (0.0, 0.5, 0.5)


class TestQ11:
    def test_formula(self):
        assert q11(0.5, 0.5, 5.0011e-3) == pytest.approx(
            0.25 * math.exp(-1.0) * 5.0011e-3, rel=1e-15
        )

    def test_vacuum_component_is_zero(self):
        assert q11(0.0, 0.5, 0.9) == 0.0

    def test_rejects_bad_yield(self):
        with pytest.raises(ValidationError):
            q11(0.1, 0.1, 1.5)
        with pytest.raises(ValidationError):
            q11(0.1, 0.1, -0.1)
