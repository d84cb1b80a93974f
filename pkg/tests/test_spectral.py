"""Tests for the periodogram and subharmonic metrics."""

import numpy as np
import pytest

from quditdtc.spectral import (
    peak_metrics,
    periodogram,
    subharmonic_weight,
    target_bin,
)


class TestPeriodogram:
    def test_constant_series_zero_power(self):
        spec = periodogram(np.full(64, 3.7))
        np.testing.assert_allclose(spec.power, 0.0, atol=1e-22)

    def test_alternating_series_nyquist(self):
        n = 64
        spec = periodogram((-1.0) ** np.arange(n))
        assert spec.power[n // 2] == pytest.approx(n**2)
        mask = np.ones(n, dtype=bool)
        mask[n // 2] = False
        np.testing.assert_allclose(spec.power[mask], 0.0, atol=1e-20)

    def test_cosine_quarter_frequency(self):
        # x(n) = cos(2 pi n / 4), N = 8: hand DFT gives power 16 at k = 2 and 6
        spec = periodogram(np.cos(2 * np.pi * np.arange(8) / 4))
        np.testing.assert_allclose(spec.power[2], 16.0, atol=1e-12)
        np.testing.assert_allclose(spec.power[6], 16.0, atol=1e-12)
        others = [k for k in range(8) if k not in (2, 6)]
        np.testing.assert_allclose(spec.power[others], 0.0, atol=1e-12)

    def test_parseval(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(300)
        spec = periodogram(x)
        lhs = spec.power.sum()
        rhs = x.size * np.sum((x - x.mean()) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-8)

    def test_rejects_short_series(self):
        with pytest.raises(ValueError):
            periodogram(np.array([1.0]))


class TestTargetBin:
    def test_round_half_up(self):
        # N_t = 10, m = 4 -> 2.5 rounds up to 3
        assert target_bin(10, 4) == 3
        assert target_bin(300, 2) == 150
        assert target_bin(300, 3) == 100
        assert target_bin(300, 4) == 75

    def test_signed(self):
        assert target_bin(300, -4) == 225
        assert target_bin(300, -2) == 150

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            target_bin(300, 0)


class TestSubharmonicWeight:
    def test_period_two(self):
        spec = periodogram((-1.0) ** np.arange(300))
        assert subharmonic_weight(spec, 2) == pytest.approx(1.0)

    def test_period_three_splits_weight(self):
        # (-1, 1, 0) repeating: |X(1)|^2 = |X(2)|^2 = 3 per period, C_3 = 0.5
        spec = periodogram(np.tile([-1.0, 1.0, 0.0], 100))
        assert subharmonic_weight(spec, 3) == pytest.approx(0.5, abs=1e-12)

    def test_white_noise_floor(self):
        rng = np.random.default_rng(42)
        values = []
        for _ in range(100):
            spec = periodogram(rng.standard_normal(300))
            values.append(subharmonic_weight(spec, 2))
        # expectation 1/N_t; 0.02 is ~3 sigma above for 100 trials
        assert np.mean(values) <= 0.02

    def test_no_signal_returns_none(self):
        assert subharmonic_weight(periodogram(np.zeros(32)), 2) is None

    def test_scaling_and_offset_invariance(self):
        rng = np.random.default_rng(17)
        x = rng.standard_normal(120)
        base = subharmonic_weight(periodogram(x), 2)
        assert subharmonic_weight(periodogram(4.2 * x), 2) == pytest.approx(base)
        assert subharmonic_weight(periodogram(x + 11.0), 2) == pytest.approx(base)

    def test_complex_phasor_signed_bin(self):
        # e^{-2 pi i n/4}: all weight at the signed -1/4 bin, none at +1/4
        x = np.exp(-2j * np.pi * np.arange(300) / 4)
        spec = periodogram(x)
        assert spec.complex_input
        assert subharmonic_weight(spec, -4) == pytest.approx(1.0, abs=1e-12)
        assert subharmonic_weight(spec, 4) == pytest.approx(0.0, abs=1e-12)


class TestPeakMetrics:
    def make_tone(self, n, k):
        return np.cos(2 * np.pi * k * np.arange(n) / n)

    def test_tone_exactly_on_target(self):
        spec = periodogram(self.make_tone(300, 150))
        pm = peak_metrics(spec, 2, halfwidth=3)
        assert pm.delta_f == pytest.approx(0.0, abs=1e-15)
        assert pm.gamma == pytest.approx(0.0, abs=1e-12)

    def test_tone_one_bin_off(self):
        spec = periodogram(self.make_tone(300, 101))
        pm = peak_metrics(spec, 3, halfwidth=3)
        assert pm.delta_f == pytest.approx(1 / 300, abs=1e-15)

    def test_two_equal_bins_tie_break_and_width(self):
        # equal power at k_m - 1 and k_m + 1: lowest index wins;
        # gamma = 2.355 * sqrt(0.5 * (2/N)^2) by hand
        n = 300
        k0 = 100
        x = (self.make_tone(n, k0 - 1) + self.make_tone(n, k0 + 1))
        spec = periodogram(x)
        pm = peak_metrics(spec, 3, halfwidth=2)
        assert pm.f_peak == pytest.approx((k0 - 1) / n)
        expected_gamma = 2.355 * np.sqrt(0.5 * (2 / n) ** 2)
        assert pm.gamma == pytest.approx(expected_gamma, rel=1e-10)

    def test_delta_f_bounded_by_window(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            spec = periodogram(rng.standard_normal(300))
            pm = peak_metrics(spec, 2, halfwidth=3)
            assert abs(pm.delta_f) <= 3 / 300 + 1e-15
            assert pm.gamma >= 0.0

    def test_no_signal_window(self):
        spec = periodogram(np.zeros(64))
        assert peak_metrics(spec, 2, halfwidth=2) is None

    def test_window_must_fit(self):
        spec = periodogram(np.ones(8) * (-1.0) ** np.arange(8))
        with pytest.raises(ValueError, match="window"):
            peak_metrics(spec, 2, halfwidth=5)

    def test_signed_target_window(self):
        x = np.exp(-2j * np.pi * np.arange(300) / 4)
        pm = peak_metrics(periodogram(x), -4, halfwidth=3)
        assert pm.delta_f == pytest.approx(0.0, abs=1e-15)
        assert pm.gamma == pytest.approx(0.0, abs=1e-12)
