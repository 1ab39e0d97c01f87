"""Embedding construction, covariances, grid search, and model order."""

import math

import numpy as np
import pytest

from nhssa.embedding import (
    EmbeddingConfig,
    build_information_vectors,
    condition_grid_search,
    estimate_model_order,
    lag_covariances,
    trajectory_matrices,
)
from nhssa.signal_model import (
    ComplexSeries,
    NoiseSpec,
    SignalSpec,
    generate_noise,
    synthesize_signal,
)

TWO_PI = 2.0 * math.pi

FOUR_COSINES = SignalSpec.from_cosines([0.04, 0.06, 0.07, 0.12])

RAMP = ComplexSeries(np.arange(5.0))


def vandermonde_transfer(cycles, cfg):
    """Ground-truth one-step matrix from the true frequencies (time
    shift-invariance construction)."""
    nus = TWO_PI * np.asarray(cycles)
    v = np.exp(1j * np.outer(cfg.kappas, nus))
    lam = np.diag(np.exp(1j * nus))
    return v @ lam @ np.linalg.inv(v)


class TestInformationVectors:
    def test_ramp_unit_multiplicity(self):
        ys = build_information_vectors(RAMP, EmbeddingConfig(2, 1))
        np.testing.assert_allclose(ys, [[0, 1, 2, 3], [1, 2, 3, 4]])

    def test_ramp_multiplicity_two(self):
        ys = build_information_vectors(RAMP, EmbeddingConfig(2, 2))
        np.testing.assert_allclose(ys, [[0, 1, 2], [2, 3, 4]])

    def test_exponential_shift(self):
        nu = 0.47
        f = ComplexSeries(np.exp(1j * nu * np.arange(40)))
        ys = build_information_vectors(f, EmbeddingConfig(5, 3))
        np.testing.assert_allclose(ys[:, 1:], np.exp(1j * nu) * ys[:, :-1], atol=1e-12)

    def test_too_short_reports_minimum(self):
        cfg = EmbeddingConfig(4, 3)
        with pytest.raises(ValueError, match=str(cfg.min_length())):
            build_information_vectors(ComplexSeries(np.arange(5.0)), cfg)


class TestTrajectoryMatrices:
    def test_ramp_pair(self):
        tp = trajectory_matrices(RAMP, EmbeddingConfig(2, 1))
        np.testing.assert_allclose(tp.x0, [[0, 1, 2], [1, 2, 3]])
        np.testing.assert_allclose(tp.x1, [[1, 2, 3], [2, 3, 4]])

    def test_rank_equals_mode_count(self):
        s = synthesize_signal(FOUR_COSINES, 300)
        for d in (9, 12, 18):
            tp = trajectory_matrices(s, EmbeddingConfig(d, 2))
            assert np.linalg.matrix_rank(tp.x0) == 8

    def test_hankel_structure_at_unit_multiplicity(self):
        rng = np.random.default_rng(3)
        f = ComplexSeries(rng.normal(size=30))
        tp = trajectory_matrices(f, EmbeddingConfig(4, 1))
        for i in range(4):
            for k in range(tp.x0.shape[1]):
                assert tp.x0[i, k] == f.samples[i + k]


class TestLagCovariances:
    def test_single_column(self):
        cfg = EmbeddingConfig(2, 1)
        tp = trajectory_matrices(ComplexSeries(np.array([1.0, 0.0, 0.0])), cfg)
        cov = lag_covariances(tp)
        np.testing.assert_allclose(cov.g0, [[1.0, 0.0], [0.0, 0.0]])

    def test_population_limit_single_exponential(self):
        # Long-sample covariance approaches the analytic form
        # [[1 + eps^2, e^{-i nu}], [e^{i nu}, 1 + eps^2]].
        nu, eps, m = 1.1, 0.4, 400_000
        k = np.arange(m)
        rng = np.random.default_rng(9)
        f = ComplexSeries(np.exp(1j * nu * k) + eps * rng.standard_normal(m))
        cov = lag_covariances(trajectory_matrices(f, EmbeddingConfig(2, 1)))
        expected = np.array(
            [
                [1 + eps**2, np.exp(-1j * nu)],
                [np.exp(1j * nu), 1 + eps**2],
            ]
        )
        np.testing.assert_allclose(cov.g0, expected, atol=5e-3)

    def test_hermitian(self):
        rng = np.random.default_rng(4)
        f = ComplexSeries(rng.normal(size=60) + 1j * rng.normal(size=60))
        cov = lag_covariances(trajectory_matrices(f, EmbeddingConfig(5, 2)))
        np.testing.assert_allclose(cov.g0, cov.g0.conj().T, atol=1e-14)
        np.testing.assert_allclose(cov.g2, cov.g2.conj().T, atol=1e-14)
        assert np.trace(cov.g0).real >= 0

    def test_schur_complement_psd(self):
        rng = np.random.default_rng(5)
        f = ComplexSeries(rng.normal(size=80) + 1j * rng.normal(size=80))
        cov = lag_covariances(trajectory_matrices(f, EmbeddingConfig(4, 1)))
        schur = cov.g2 - cov.g1 @ np.linalg.solve(cov.g0, cov.g1.conj().T)
        eigs = np.linalg.eigvalsh(schur)
        assert eigs.min() >= -1e-10


class TestConditionGrid:
    def test_rank_deficient_cells_rejected_cleanly(self):
        # Noiseless single exponential: every d >= 2 cell is singular, so the
        # whole grid is excluded and rejected without numerical blow-ups.
        f = ComplexSeries(np.exp(1j * 0.8 * np.arange(60)))
        with pytest.raises(ValueError, match="feasible"):
            condition_grid_search(f, [2, 3, 4], [1, 2])

    def test_singular_cells_marked_infinite(self):
        # Mix a rank-deficient region with noisy (full-rank) data by using a
        # two-mode signal: cells with d = 2 are full rank, d = 4 singular.
        f = synthesize_signal(SignalSpec(((0.1, 1.0), (-0.1, 0.5 + 0.5j))), 80)
        grid = condition_grid_search(f, [2, 4], [1])
        assert np.isfinite(grid.cond[0, 0])
        assert np.isinf(grid.cond[1, 0])
        assert (grid.best_d, grid.best_mbar) == (2, 1)

    def test_white_noise_fixture_prefers_small_condition_at_mbar4(self):
        s = synthesize_signal(FOUR_COSINES, 300)
        w = generate_noise(NoiseSpec.white(1.0, 1.0, seed=1000), 300)
        f = ComplexSeries(s.samples + w.samples)
        grid = condition_grid_search(f, range(6, 25), range(1, 13))
        finite = grid.cond[np.isfinite(grid.cond)]
        col = grid.cond[:, grid.mbar_values.index(4)]
        best_at_4 = np.min(col[np.isfinite(col)])
        assert best_at_4 <= 10.0 * finite.min()

    def test_ar1_fixture_cell_18_3_near_minimal(self):
        s = synthesize_signal(FOUR_COSINES, 300)
        w = generate_noise(NoiseSpec.ar1(0.7, 1.0, 1.0, seed=1000), 300)
        f = ComplexSeries(s.samples + w.samples)
        grid = condition_grid_search(f, range(6, 25), range(1, 13))
        cell = grid.cond[grid.d_values.index(18), grid.mbar_values.index(3)]
        assert np.isfinite(cell)
        assert cell <= 10.0 * grid.cond[np.isfinite(grid.cond)].min()

    def test_scaling_invariance(self):
        rng = np.random.default_rng(6)
        f = ComplexSeries(rng.normal(size=120))
        scaled = ComplexSeries(3.7j * f.samples)
        a = condition_grid_search(f, [4, 6], [1, 2, 3])
        b = condition_grid_search(scaled, [4, 6], [1, 2, 3])
        np.testing.assert_allclose(a.cond, b.cond, rtol=1e-10)
        assert (a.best_d, a.best_mbar) == (b.best_d, b.best_mbar)

    def test_infeasible_grid_rejected(self):
        f = ComplexSeries(np.arange(10.0))
        with pytest.raises(ValueError, match="feasible"):
            condition_grid_search(f, [8], [4])

    def test_gram_condition_is_square(self):
        rng = np.random.default_rng(12)
        f = ComplexSeries(rng.normal(size=100))
        grid = condition_grid_search(f, [4], [1])
        np.testing.assert_allclose(grid.cond_gram, grid.cond**2)


class TestModelOrder:
    def test_noiseless_four_cosines(self):
        s = synthesize_signal(FOUR_COSINES, 300)
        cov = lag_covariances(trajectory_matrices(s, EmbeddingConfig(18, 4)))
        assert estimate_model_order(cov.g0) == 8

    def test_identity_has_no_signal(self):
        assert estimate_model_order(np.eye(18)) == 0

    def test_white_noise_rarely_reports_structure(self):
        hits = 0
        trials = 100
        for seed in range(trials):
            w = generate_noise(NoiseSpec.white(1.0, 1.0, seed=3000 + seed), 300)
            cov = lag_covariances(trajectory_matrices(w, EmbeddingConfig(18, 1)))
            hits += estimate_model_order(cov.g0) <= 4
        assert hits / trials >= 0.90

    def test_floor_method_counts_above_noise(self):
        lam = np.array([10.0, 8.0, 1.1, 1.0, 0.9, 1.0])
        g0 = np.diag(lam)
        assert estimate_model_order(g0, method="floor", tau=0.5) == 2

    def test_small_matrix_rejected(self):
        with pytest.raises(ValueError):
            estimate_model_order(np.eye(1))


class TestShiftInvariance:
    def test_noiseless_transfer_matrix(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n_terms = int(rng.integers(2, 5))
            cycles = []
            while len(cycles) < n_terms:
                c = float(np.round(rng.uniform(-0.45, 0.45), 3))
                if all(abs(c - o) > 0.02 for o in cycles):
                    cycles.append(c)
            amps = rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)
            spec = SignalSpec(tuple(zip(cycles, amps)))
            mbar = int(rng.integers(1, 4))
            cfg = EmbeddingConfig(n_terms, mbar)
            m = cfg.min_length() + int(rng.integers(20, 60))
            f = synthesize_signal(spec, m)
            tp = trajectory_matrices(f, cfg)
            omega = vandermonde_transfer(cycles, cfg)
            resid = np.linalg.norm(tp.x1 - omega @ tp.x0) / np.linalg.norm(tp.x1)
            assert resid < 1e-10
