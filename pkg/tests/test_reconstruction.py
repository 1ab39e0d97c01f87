"""Back-mapping components to sample space and grouping them."""

import math
import warnings

import numpy as np
import pytest

from nhssa import core
from nhssa.embedding import EmbeddingConfig, build_information_vectors, trajectory_matrices
from nhssa.reconstruction import Selection, component_to_series, group_reconstruct
from nhssa.signal_model import (
    ComplexSeries,
    NoiseSpec,
    SignalSpec,
    generate_noise,
    synthesize_signal,
)

TWO_PI = 2.0 * math.pi


def decompose_raw(f, cfg, policy=None):
    ys = build_information_vectors(f, cfg)
    tp = trajectory_matrices(f, cfg)
    pd = core.svd_pencil(tp, policy)
    z = core.z_sequences(pd, ys).z
    return pd, z


class TestComponentToSeries:
    def test_single_exponential_reproduced(self):
        nu = 0.8
        cfg = EmbeddingConfig(2, 1)
        f = ComplexSeries(np.exp(1j * nu * np.arange(60)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pd, z = decompose_raw(f, cfg)
        comp = component_to_series(pd, z, 0, cfg)
        np.testing.assert_allclose(comp.samples, f.samples, atol=1e-9)

    def test_components_sum_to_signal(self):
        spec = SignalSpec.from_cosines([0.04, 0.06, 0.07, 0.12])
        f = synthesize_signal(spec, 300)
        cfg = EmbeddingConfig(18, 4)
        pd, z = decompose_raw(f, cfg)
        total = np.zeros(300, dtype=complex)
        for j in range(pd.rank):
            total += component_to_series(pd, z, j, cfg).samples
        np.testing.assert_allclose(total, f.samples, atol=1e-8)

    def test_unit_multiplicity_is_antidiagonal_averaging(self):
        # Hand-checked oracle on a small case: with mbar = 1 the average of
        # the rank-one array over each anti-diagonal equals the output.
        rng = np.random.default_rng(5)
        cfg = EmbeddingConfig(4, 1)
        f = ComplexSeries(rng.standard_normal(12) + 1j * rng.standard_normal(12))
        pd, z = decompose_raw(f, cfg)
        j = 1
        array = np.outer(pd.vhat[:, j], z[j])
        manual = np.zeros(12, dtype=complex)
        for t in range(12):
            cells = [
                array[s, k]
                for s in range(4)
                for k in range(z.shape[1])
                if s + k == t
            ]
            manual[t] = np.mean(cells)
        comp = component_to_series(pd, z, j, cfg)
        np.testing.assert_allclose(comp.samples, manual, atol=1e-12)

    def test_row_scaling_is_linear(self):
        rng = np.random.default_rng(6)
        cfg = EmbeddingConfig(3, 2)
        f = ComplexSeries(rng.standard_normal(40) + 1j * rng.standard_normal(40))
        pd, z = decompose_raw(f, cfg)
        base = component_to_series(pd, z, 0, cfg).samples
        z2 = z.copy()
        alpha = 2.5 - 1j
        z2[0] *= alpha
        scaled = component_to_series(pd, z2, 0, cfg).samples
        np.testing.assert_allclose(scaled, alpha * base, atol=1e-12)

    def test_out_of_range_row_rejected(self):
        cfg = EmbeddingConfig(3, 1)
        f = ComplexSeries(np.exp(1j * 0.3 * np.arange(30)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pd, z = decompose_raw(f, cfg)
        with pytest.raises(ValueError):
            component_to_series(pd, z, pd.rank + 3, cfg)


class TestGroupReconstruct:
    def test_noiseless_all_signal_leaves_no_noise(self):
        spec = SignalSpec.from_cosines([0.04, 0.12])
        f = synthesize_signal(spec, 200)
        cfg = EmbeddingConfig(6, 2)
        pd, z = decompose_raw(f, cfg)
        sel = Selection(set(range(pd.rank)), set())
        shat, what = group_reconstruct(sel, pd, z, cfg, f)
        assert np.linalg.norm(what.samples) <= 1e-8 * np.linalg.norm(f.samples)

    def test_split_is_exact_identity(self):
        spec = SignalSpec.from_cosines([0.04, 0.06, 0.07, 0.12])
        s = synthesize_signal(spec, 300)
        w = generate_noise(NoiseSpec.white(1.0, 1.0, seed=4), 300)
        f = ComplexSeries(s.samples + w.samples)
        cfg = EmbeddingConfig(18, 4)
        pd, z = decompose_raw(f, cfg)
        kept, rest = core.threshold_filter(pd.eigvals, 0.6)
        sel = Selection(set(kept), set(rest))
        shat, what = group_reconstruct(sel, pd, z, cfg, f)
        np.testing.assert_allclose(
            shat.samples + what.samples, f.samples, atol=1e-12 * np.linalg.norm(f.samples)
        )

    def test_moving_a_row_moves_exactly_its_series(self):
        rng = np.random.default_rng(9)
        f = ComplexSeries(rng.standard_normal(80) + 1j * rng.standard_normal(80))
        cfg = EmbeddingConfig(5, 1)
        pd, z = decompose_raw(f, cfg)
        comps = [component_to_series(pd, z, j, cfg) for j in range(pd.rank)]
        sel_a = Selection({0, 1}, set(range(2, pd.rank)))
        sel_b = Selection({0}, set(range(1, pd.rank)))
        shat_a, _ = group_reconstruct(sel_a, pd, z, cfg, f, comps)
        shat_b, _ = group_reconstruct(sel_b, pd, z, cfg, f, comps)
        np.testing.assert_allclose(
            shat_a.samples - shat_b.samples, comps[1].samples, atol=1e-12
        )

    def test_empty_signal_selection_flagged(self):
        f = ComplexSeries(np.exp(1j * 0.4 * np.arange(50)))
        cfg = EmbeddingConfig(2, 1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pd, z = decompose_raw(f, cfg)
        sel = Selection(set(), set(range(pd.rank)))
        with pytest.warns(RuntimeWarning, match="empty signal"):
            shat, what = group_reconstruct(sel, pd, z, cfg, f)
        assert np.all(shat.samples == 0)
        np.testing.assert_allclose(what.samples, f.samples)

    def test_real_input_signal_estimate_real(self):
        spec = SignalSpec.from_cosines([0.04, 0.12])
        s = synthesize_signal(spec, 200)
        w = generate_noise(NoiseSpec.white(0.25, 1.0, seed=13), 200)
        f = ComplexSeries(s.samples + w.samples)
        cfg = EmbeddingConfig(8, 2)
        pd, z = decompose_raw(f, cfg)
        kept, rest = core.threshold_filter(pd.eigvals, 0.6)
        sel = Selection(set(kept), set(rest))
        shat, what = group_reconstruct(sel, pd, z, cfg, f)
        assert np.all(shat.samples.imag == 0.0)
        np.testing.assert_allclose(shat.samples + what.samples, f.samples, atol=1e-12)

    def test_white_preset_recovery_error(self):
        # Monte Carlo: the de-noised estimate retains the in-subspace noise;
        # at 3 dB SNR with d = 18 that leaves a relative error around 0.42.
        from nhssa.bench import BENCH_LAMBDA_C, BENCH_THRESHOLDS
        from nhssa.pipeline import PipelineConfig, decompose

        spec = SignalSpec.from_cosines([0.04, 0.06, 0.07, 0.12])
        s = synthesize_signal(spec, 300)
        ok = 0
        trials = 20
        cfg = PipelineConfig(
            d=18, mbar=4, lambda_c=BENCH_LAMBDA_C, thresholds=BENCH_THRESHOLDS
        )
        for seed in range(trials):
            w = generate_noise(NoiseSpec.white(1.0, 1.0, seed=1000 + seed), 300)
            f = ComplexSeries(s.samples + w.samples)
            session = decompose(f, cfg)
            err = np.linalg.norm(
                session.signal_estimate.samples - s.samples
            ) / np.linalg.norm(s.samples)
            ok += err < 0.5
        assert ok / trials > 0.5
