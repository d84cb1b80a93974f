"""Tests for dense Floquet spectra and level statistics."""

import numpy as np
import pytest

from quditdtc.chain import ChainShape, basis_product_state
from quditdtc.disorder import DisorderRealization, StaticLayerParams, sample_disorder
from quditdtc.engine import FloquetProtocol, floquet_step
from quditdtc.kicks import EmbeddedKickSpec, GlobalKickSpec
from quditdtc.levelstats import (
    POISSON_R,
    build_floquet_matrix,
    circular_gaps,
    eigenphases,
    gap_ratio,
    spacing_histogram,
)


def proto(shape, kick, seed=0, zero=False):
    static = StaticLayerParams(0, 0, 0) if zero else StaticLayerParams()
    if zero:
        realization = DisorderRealization(
            np.zeros(shape.n_sites), np.zeros(shape.n_sites - 1), 0, static
        )
    else:
        realization = sample_disorder(static, shape, seed)
    return FloquetProtocol(shape, kick, static, realization)


class TestBuildFloquetMatrix:
    def test_identity_protocol(self):
        shape = ChainShape(2, 3)
        p = proto(shape, EmbeddedKickSpec(3, ((0, 2),), -1.0), zero=True)
        np.testing.assert_allclose(build_floquet_matrix(p), np.eye(9), atol=1e-14)

    def test_diagonal_only_protocol(self):
        shape = ChainShape(2, 3)
        p = proto(shape, EmbeddedKickSpec(3, ((0, 2),), -1.0), seed=2)
        u = build_floquet_matrix(p)
        from quditdtc.disorder import energy_vector

        expected = np.diag(np.exp(-1j * energy_vector(p.realization, shape)))
        np.testing.assert_allclose(u, expected, atol=1e-13)

    def test_embedded_2t_permutation_entries(self):
        # K per site maps |0> -> -i|2>, |2> -> -i|0>, |1> -> |1>
        shape = ChainShape(2, 3)
        p = proto(shape, EmbeddedKickSpec(3, ((0, 2),), 0.0), zero=True)
        u = build_floquet_matrix(p)
        assert u[8, 0] == pytest.approx(-1.0)   # |00> -> (-i)^2 |22>
        assert u[4, 4] == pytest.approx(1.0)    # |11> fixed
        assert u[2, 6] == pytest.approx(-1.0)   # |20> -> -|02>
        assert u[7, 1] == pytest.approx(-1j)    # |01> -> -i |21>
        assert np.count_nonzero(np.abs(u) > 1e-13) == 9

    def test_matches_columnwise_step(self):
        shape = ChainShape(2, 4)
        p = proto(shape, EmbeddedKickSpec(4, ((0, 3), (1, 2)), 0.08), seed=5)
        u = build_floquet_matrix(p)
        rng = np.random.default_rng(0)
        for j in rng.integers(0, shape.dim, size=5):
            e = np.zeros(shape.dim, dtype=complex)
            e[j] = 1.0
            from quditdtc.chain import QuditState

            col = floquet_step(QuditState(shape, e), p).amplitudes
            np.testing.assert_allclose(u[:, j], col, atol=1e-10)

    def test_unitarity(self):
        shape = ChainShape(3, 3)
        p = proto(shape, GlobalKickSpec(3, 2, 0.12), seed=4)
        u = build_floquet_matrix(p)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(27), atol=1e-9)

    def test_dense_cap(self):
        shape = ChainShape(9, 3)
        p = proto(shape, EmbeddedKickSpec(3, ((0, 2),), 0.0), seed=1)
        with pytest.raises(ValueError, match="reduce N"):
            build_floquet_matrix(p, dense_cap=8192)


class TestEigenphases:
    def test_identity(self):
        phases = eigenphases(np.eye(7))
        np.testing.assert_allclose(phases.phases, 0.0, atol=1e-12)

    def test_fourth_roots(self):
        u = np.diag([1, 1j, -1, -1j]).astype(complex)
        phases = eigenphases(u)
        np.testing.assert_allclose(
            phases.phases, [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-12
        )

    def test_random_diagonal(self):
        rng = np.random.default_rng(8)
        args = rng.uniform(0, 2 * np.pi, size=50)
        phases = eigenphases(np.diag(np.exp(1j * args)))
        np.testing.assert_allclose(phases.phases, np.sort(args), atol=1e-10)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="unitary"):
            eigenphases(np.diag([1.0, 2.0]))


class TestGapRatio:
    def test_equally_spaced_is_one(self):
        phases = np.arange(16) * (2 * np.pi / 16)
        assert gap_ratio(phases) == pytest.approx(1.0, abs=1e-12)

    def test_poisson_oracle(self):
        # i.i.d. exponential spacings -> <r> = 2 ln 2 - 1
        rng = np.random.default_rng(123)
        gaps = rng.exponential(size=100_000)
        ratios = np.minimum(gaps[:-1], gaps[1:]) / np.maximum(gaps[:-1], gaps[1:])
        assert abs(ratios.mean() - POISSON_R) < 0.01
        # the circular implementation agrees on phases built from those gaps
        phases = np.cumsum(gaps)[:-1]
        phases = phases / phases[-1] * 2 * np.pi * 0.999
        assert abs(gap_ratio(phases) - POISSON_R) < 0.01

    def test_degenerate_pairs_excluded(self):
        phases = np.array([0.0, 1.0, 1.0, 2.0, 3.0, 4.0])
        value, excluded = gap_ratio(phases, return_excluded=True)
        assert excluded >= 1
        assert 0.0 <= value <= 1.0

    def test_invariant_under_global_rotation(self):
        rng = np.random.default_rng(5)
        phases = np.sort(rng.uniform(0, 2 * np.pi, size=200))
        rotated = np.sort((phases + 1.234) % (2 * np.pi))
        assert gap_ratio(rotated) == pytest.approx(gap_ratio(phases), abs=1e-12)

    def test_requires_three_phases(self):
        with pytest.raises(ValueError):
            gap_ratio(np.array([0.1, 0.2]))


class TestSpacingHistogram:
    def test_equally_spaced_spike(self):
        phases = np.arange(100) * (2 * np.pi / 100)
        hist = spacing_histogram(phases, n_bins=13, s_max=3.9)
        peak_bin = int(np.argmax(hist.density))
        centers = (hist.bin_edges[:-1] + hist.bin_edges[1:]) / 2
        assert centers[peak_bin] == pytest.approx(1.0, abs=0.16)
        assert np.count_nonzero(hist.density) == 1

    def test_mean_normalization(self):
        rng = np.random.default_rng(2)
        phases = np.sort(rng.uniform(0, 2 * np.pi, size=500))
        gaps = circular_gaps(phases)
        assert (gaps / gaps.mean()).mean() == pytest.approx(1.0, abs=1e-12)

    def test_exponential_matches_poisson_density(self):
        # KS distance between unit-mean spacings and Exp(1) below 0.02
        rng = np.random.default_rng(11)
        gaps = rng.exponential(size=100_000)
        s = np.sort(gaps / gaps.mean())
        ecdf = np.arange(1, s.size + 1) / s.size
        ks = np.max(np.abs(ecdf - (1 - np.exp(-s))))
        assert ks < 0.02

    def test_goe_level_repulsion(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((400, 400))
        ev = np.linalg.eigvalsh((a + a.T) / 2)
        bulk = ev[100:300]
        gaps = np.diff(bulk)
        s = gaps / gaps.mean()
        edges = np.linspace(0, 4, 40)
        counts, _ = np.histogram(s, bins=edges)
        density = counts / (s.size * (edges[1] - edges[0]))
        assert density[0] < 0.1

    def test_density_integrates_below_one(self):
        rng = np.random.default_rng(4)
        phases = np.sort(rng.uniform(0, 2 * np.pi, size=300))
        hist = spacing_histogram(phases, n_bins=30, s_max=2.0)
        integral = hist.density.sum() * (hist.bin_edges[1] - hist.bin_edges[0])
        assert integral <= 1.0 + 1e-12
        assert integral == pytest.approx(hist.covered_fraction, abs=1e-12)
