"""Baseline ESPRIT estimator and the single-exponential row refinement."""

import math

import numpy as np
import pytest

from nhssa.components import cumulative_phase, phase_slope_frequency
from nhssa.esprit import EspritConfig, esprit_estimate, refine_single
from nhssa.signal_model import (
    ComplexSeries,
    NoiseSpec,
    SignalSpec,
    generate_noise,
    synthesize_signal,
)

TWO_PI = 2.0 * math.pi

FOUR = [0.04, 0.06, 0.07, 0.12]


class TestEspritEstimate:
    def test_noiseless_four_cosines_exact(self):
        f = synthesize_signal(SignalSpec.from_cosines(FOUR), 300)
        result = esprit_estimate(f, EspritConfig(4, 100))
        np.testing.assert_allclose(result.cycles, FOUR, atol=1e-8)
        assert not result.truncated and result.unpaired == 0

    def test_any_valid_cov_size_exact(self):
        f = synthesize_signal(SignalSpec.from_cosines(FOUR), 300)
        for cov_size in (12, 40, 100, 150):
            result = esprit_estimate(f, EspritConfig(4, cov_size))
            np.testing.assert_allclose(result.cycles, FOUR, atol=1e-8)

    def test_overestimated_order_adds_random_extras(self):
        s = synthesize_signal(SignalSpec.from_cosines(FOUR), 300)
        w = generate_noise(NoiseSpec.white(1.0, 1.0, seed=1000), 300)
        f = ComplexSeries(s.samples + w.samples)
        result = esprit_estimate(f, EspritConfig(7, 100))
        assert len(result.cycles) == 7

    def test_scaling_invariance(self):
        f = synthesize_signal(SignalSpec.from_cosines(FOUR), 300)
        scaled = ComplexSeries(17.0 * f.samples.real)
        a = esprit_estimate(f, EspritConfig(4, 60)).cycles
        b = esprit_estimate(scaled, EspritConfig(4, 60)).cycles
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_constant_requires_order_headroom(self):
        spec = SignalSpec.from_cosines(FOUR, constant=2.0)
        f = synthesize_signal(spec, 300)
        # with one extra cosine slot the DC mode is absorbed and the true
        # positive frequencies survive
        result = esprit_estimate(f, EspritConfig(5, 100))
        for truth in FOUR:
            assert np.min(np.abs(result.cycles - truth)) < 1e-6

    def test_rank_deficient_returns_fewer_with_flag(self):
        f = synthesize_signal(SignalSpec.from_cosines([0.1]), 200)
        result = esprit_estimate(f, EspritConfig(3, 30))
        assert result.truncated
        assert len(result.cycles) <= 2
        assert np.min(np.abs(result.cycles - 0.1)) < 1e-8

    def test_complex_input_keeps_sign(self):
        f = synthesize_signal(SignalSpec(((-0.2, 1.0), (0.3, 0.5))), 200)
        result = esprit_estimate(f, EspritConfig(1, 20))
        np.testing.assert_allclose(np.sort(result.cycles), [-0.2, 0.3], atol=1e-8)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            EspritConfig(4, 8)  # cov_size must exceed 2 * cosines
        f = synthesize_signal(SignalSpec.from_cosines([0.1]), 50)
        with pytest.raises(ValueError):
            esprit_estimate(f, EspritConfig(2, 30))  # m < 2 * cov_size


class TestRefineSingle:
    def test_unit_exponential(self):
        row = np.exp(1j * TWO_PI * 0.12 * np.arange(150))
        cycles, source = refine_single(row)
        assert cycles == pytest.approx(0.12, abs=1e-9)
        assert source == "esprit1"

    def test_agrees_with_phase_slope_on_clean_rows(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            nu = float(rng.uniform(-math.pi / 2, math.pi / 2))
            n = int(rng.integers(60, 200))
            row = np.exp(1j * nu * np.arange(n)) * (1 + 0.01 * rng.standard_normal(n))
            cycles, _ = refine_single(row)
            slope, _ = phase_slope_frequency(cumulative_phase(row))
            assert abs(cycles * TWO_PI - slope) < TWO_PI / n

    def test_merged_pair_lands_between(self):
        k = np.arange(70)
        row = 0.5 * np.exp(1j * TWO_PI * 0.01 * k) + 0.5 * np.exp(1j * TWO_PI * 0.015 * k)
        cycles, _ = refine_single(row)
        assert 0.01 < cycles < 0.015

    def test_degenerate_row_falls_back(self):
        row = np.zeros(50, dtype=complex)
        row[0] = 1.0  # single spike: no shift-invariant subspace
        cycles, source = refine_single(row)
        assert source == "phase_slope"
        assert np.isfinite(cycles)

    def test_short_row_rejected(self):
        with pytest.raises(ValueError):
            refine_single(np.ones(3, dtype=complex))
