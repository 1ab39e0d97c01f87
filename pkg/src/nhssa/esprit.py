"""Baseline ESPRIT frequency estimation from shift invariance of a Hankel
signal subspace, plus the single-exponential refinement used on accepted
eigenbasis rows.

The direct-data route is used throughout: the Hankel trajectory matrix is
SVD-factored instead of forming an explicit autocorrelation estimate, and the
rotation is solved in the least-squares sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .components import cumulative_phase, phase_slope_frequency
from .signal_model import ComplexSeries

TWO_PI = 2.0 * math.pi

_RANK_RTOL = 1e-12
_ZERO_CYCLES = 1e-9


@dataclass(frozen=True)
class EspritConfig:
    """Assumed cosine count and the Hankel height (covariance size)."""

    model_order_cosines: int
    cov_size: int

    def __post_init__(self):
        if self.model_order_cosines < 1:
            raise ValueError("model order must be at least 1")
        if self.cov_size <= 2 * self.model_order_cosines:
            raise ValueError("cov_size must exceed twice the cosine count")


@dataclass(frozen=True)
class EspritResult:
    """Estimated frequencies in cycles/sample with degradation flags."""

    cycles: np.ndarray
    truncated: bool = False     # numerical rank fell short of the model order
    unpaired: int = 0           # real input: modes without a conjugate partner


def _hankel(x: np.ndarray, height: int) -> np.ndarray:
    width = x.size - height + 1
    idx = np.arange(height)[:, None] + np.arange(width)[None, :]
    return x[idx]


def _subspace_modes(x: np.ndarray, n_modes: int, height: int) -> tuple[np.ndarray, bool]:
    """Eigenvalues of the shift-invariance rotation of the dominant subspace."""
    h = _hankel(x, height)
    u, svals, _ = np.linalg.svd(h, full_matrices=False)
    usable = int(np.sum(svals > _RANK_RTOL * svals[0])) if svals[0] > 0 else 0
    n_eff = min(n_modes, usable, height - 1)
    if n_eff == 0:
        return np.empty(0, dtype=np.complex128), True
    e = u[:, :n_eff]
    rotation, _, _, _ = np.linalg.lstsq(e[:-1], e[1:], rcond=None)
    return np.linalg.eigvals(rotation), n_eff < n_modes


def _merge_conjugate_pairs(cycles: np.ndarray) -> tuple[np.ndarray, int]:
    """Average +/- partners of a real signal's mode arguments.

    Zero-argument modes carry no positive frequency and are dropped; modes
    left without a partner contribute their magnitude and are counted.
    """
    pos = sorted(float(c) for c in cycles if c > _ZERO_CYCLES)
    neg = sorted(float(-c) for c in cycles if c < -_ZERO_CYCLES)
    merged, unpaired = [], 0
    while pos and neg:
        pairs = [(abs(p - n), i, j) for i, p in enumerate(pos) for j, n in enumerate(neg)]
        _, i, j = min(pairs)
        merged.append(0.5 * (pos.pop(i) + neg.pop(j)))
    for leftover in pos + neg:
        merged.append(leftover)
        unpaired += 1
    return np.sort(np.asarray(merged)), unpaired


def esprit_estimate(f: ComplexSeries, cfg: EspritConfig) -> EspritResult:
    """Estimate the cosine frequencies of a series.

    For real input the 2*n dominant modes are merged into positive
    frequencies sorted ascending; complex input yields signed frequencies.
    """
    m = len(f)
    if m < 2 * cfg.cov_size:
        raise ValueError(f"need at least {2 * cfg.cov_size} samples for cov_size={cfg.cov_size}")
    real_input = f.is_real
    x = f.samples.real if real_input else f.samples
    modes, truncated = _subspace_modes(x, 2 * cfg.model_order_cosines, cfg.cov_size)
    cycles = np.angle(modes) / TWO_PI
    if real_input:
        merged, unpaired = _merge_conjugate_pairs(cycles)
        return EspritResult(merged, truncated, unpaired)
    return EspritResult(np.sort(cycles), truncated, 0)


def refine_single(z_row: np.ndarray, height: int | None = None) -> tuple[float, str]:
    """Single-exponential frequency of an eigenbasis row, in cycles.

    Returns (cycles, source) where source is "esprit1", or "phase_slope"
    when the row is too degenerate for the subspace route.
    """
    z = np.asarray(z_row, dtype=np.complex128)
    if z.size < 4:
        raise ValueError("row too short to refine")
    if height is None:
        height = max(2, z.size // 3)
    height = min(height, z.size - 1)
    try:
        modes, _ = _subspace_modes(z, 1, height)
        if modes.size == 1 and np.isfinite(modes[0]) and modes[0] != 0:
            return float(np.angle(modes[0]) / TWO_PI), "esprit1"
    except np.linalg.LinAlgError:
        pass
    slope, _ = phase_slope_frequency(cumulative_phase(z))
    return slope / TWO_PI, "phase_slope"
