"""Phase-portrait diagnostics of eigenbasis rows and their classification.

A row tracking a genuine exponential circles the origin at a steady radius:
its cumulative phase grows linearly and its modulus stays put.  Noise rows
wander, producing phase-increment outliers ("wrapping" events) and a modulus
that is not bounded away from zero.  A damped pair shows up as a spiral:
clean phase but a drifting log-modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

LABEL_EXPONENTIAL = "Exponential"
LABEL_SPIRAL = "Spiral"
LABEL_NOISE = "Noise"
LABELS = (LABEL_EXPONENTIAL, LABEL_SPIRAL, LABEL_NOISE)

SOURCE_AUTO = "Auto"
SOURCE_HUMAN = "Human"

# Exact zeros are nudged to this floor so phase ratios stay defined.
ZERO_FLOOR = 1e-300

# A phase increment this far from the median increment counts as a wrap event.
WRAP_DEVIATION = math.pi / 2

MIN_PHASE_SAMPLES = 8


@dataclass(frozen=True)
class ClassifierThresholds:
    """Cut-offs for the Exponential / Spiral / Noise decision.

    ``max_cv`` bounds the modulus coefficient of variation, ``min_phase_r2``
    the linearity of the unwrapped phase, ``max_logmod_slope`` the per-step
    log-modulus drift beyond which a clean-phase row is a spiral, and
    ``max_wraps`` the tolerated wrap-event count (0 keeps only perfectly
    clean phases; benchmark presets raise it because strong-noise rows wrap
    occasionally even when genuine).
    """

    max_cv: float = 0.35
    min_phase_r2: float = 0.995
    max_logmod_slope: float = 2e-3
    max_wraps: int = 0

    def to_dict(self) -> dict:
        return {
            "max_cv": self.max_cv,
            "min_phase_r2": self.min_phase_r2,
            "max_logmod_slope": self.max_logmod_slope,
            "max_wraps": self.max_wraps,
        }


@dataclass
class ComponentRecord:
    """Diagnostics of one eigenbasis row; the label may be overridden later."""

    index: int
    eigval: complex
    z_row: np.ndarray
    phase: np.ndarray
    modulus_mean: float
    modulus_std: float
    wrap_events: int
    wrap_positions: tuple[int, ...]
    phase_slope: float          # radians per step
    phase_fit_r2: float
    logmod_slope: float
    label: str = LABEL_NOISE
    label_source: str = SOURCE_AUTO
    kept: bool = True           # passed the eigenvalue-modulus threshold
    cycles: float | None = None  # refined per-row frequency estimate
    freq_source: str = ""
    had_zeros: bool = False

    @property
    def abs_eigval(self) -> float:
        return abs(self.eigval)

    @property
    def slope_cycles(self) -> float:
        return self.phase_slope / TWO_PI

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "eigval": [self.eigval.real, self.eigval.imag],
            "abs_eigval": self.abs_eigval,
            "modulus": {
                "mean": self.modulus_mean,
                "std": self.modulus_std,
                "logslope": self.logmod_slope,
            },
            "wraps": self.wrap_events,
            "slope_cycles": self.slope_cycles,
            "r2": self.phase_fit_r2,
            "label": self.label,
            "label_source": self.label_source,
            "kept": self.kept,
            "cycles": self.cycles,
            "freq_source": self.freq_source,
        }


def cumulative_phase(z_row: np.ndarray) -> np.ndarray:
    """Unwrapped phase: psi[0] = arg z_0, then increments arg(z_{k+1}/z_k).

    Each increment is taken in (-pi, pi]; exact zeros are nudged to a tiny
    floor so the row stays usable (an all-zero row is rejected).
    """
    z = np.asarray(z_row, dtype=np.complex128)
    if z.size == 0 or not np.any(z != 0):
        raise ValueError("cannot unwrap the phase of an all-zero row")
    z = np.where(z == 0, ZERO_FLOOR, z)
    increments = np.angle(z[1:] * np.conj(z[:-1]))
    psi = np.empty(z.size)
    psi[0] = np.angle(z[0])
    psi[1:] = psi[0] + np.cumsum(increments)
    return psi


def detect_wrapping(psi: np.ndarray) -> tuple[int, np.ndarray]:
    """Count phase increments that jump away from the median increment.

    Returns (count, positions); position k means the step arriving at sample
    k was anomalous.
    """
    psi = np.asarray(psi, dtype=float)
    if psi.size < MIN_PHASE_SAMPLES:
        raise ValueError(f"need at least {MIN_PHASE_SAMPLES} phase samples")
    increments = np.diff(psi)
    deviation = np.abs(increments - np.median(increments))
    positions = np.flatnonzero(deviation > WRAP_DEVIATION) + 1
    return int(positions.size), positions


def modulus_profile(z_row: np.ndarray) -> tuple[float, float, float]:
    """Mean and spread of |z| plus the least-squares slope of log|z|."""
    z = np.asarray(z_row, dtype=np.complex128)
    if z.size == 0:
        raise ValueError("empty row")
    mod = np.abs(z)
    mean = float(np.mean(mod))
    std = float(np.std(mod))
    if z.size < 2:
        return mean, std, 0.0
    logmod = np.log(np.maximum(mod, ZERO_FLOOR))
    slope = float(np.polyfit(np.arange(z.size), logmod, 1)[0])
    return mean, std, slope


def _clean_segment(psi: np.ndarray, positions: np.ndarray) -> tuple[int, int]:
    # Longest stretch of samples whose internal steps carry no wrap event.
    bounds = [0, *positions.tolist(), psi.size]
    start, end = 0, 0
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b - a > end - start:
            start, end = a, b
    return start, end


def phase_slope_frequency(psi: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of the unwrapped phase, in radians per step.

    Wrap events are excluded by fitting the longest event-free segment; the
    returned r^2 measures phase linearity on that segment (1.0 for a flat
    phase, which is perfectly linear).
    """
    psi = np.asarray(psi, dtype=float)
    count, positions = detect_wrapping(psi)
    start, end = (0, psi.size) if count == 0 else _clean_segment(psi, positions)
    if end - start < 2:
        start, end = 0, psi.size
    seg = psi[start:end]
    k = np.arange(seg.size)
    slope, intercept = np.polyfit(k, seg, 1)
    ss_res = float(np.sum((seg - (slope * k + intercept)) ** 2))
    ss_tot = float(np.sum((seg - np.mean(seg)) ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), r2


def classify_component(record: ComponentRecord, thresholds: ClassifierThresholds) -> str:
    """Label a row from its diagnostics (human overrides are preserved)."""
    if record.label_source == SOURCE_HUMAN:
        return record.label
    phase_clean = (
        record.wrap_events <= thresholds.max_wraps
        and record.phase_fit_r2 >= thresholds.min_phase_r2
    )
    steady = record.modulus_std <= thresholds.max_cv * record.modulus_mean
    flat = abs(record.logmod_slope) <= thresholds.max_logmod_slope
    if phase_clean and steady and flat:
        return LABEL_EXPONENTIAL
    if phase_clean and not flat:
        return LABEL_SPIRAL
    return LABEL_NOISE


def build_component_record(
    index: int,
    eigval: complex,
    z_row: np.ndarray,
    thresholds: ClassifierThresholds | None = None,
    kept: bool = True,
) -> ComponentRecord:
    """Compute all diagnostics for one row and attach the automatic label."""
    thresholds = thresholds if thresholds is not None else ClassifierThresholds()
    z = np.asarray(z_row, dtype=np.complex128)
    psi = cumulative_phase(z)
    wraps, positions = detect_wrapping(psi)
    mean, std, logslope = modulus_profile(z)
    slope, r2 = phase_slope_frequency(psi)
    record = ComponentRecord(
        index=index,
        eigval=complex(eigval),
        z_row=z,
        phase=psi,
        modulus_mean=mean,
        modulus_std=std,
        wrap_events=wraps,
        wrap_positions=tuple(int(p) for p in positions),
        phase_slope=slope,
        phase_fit_r2=r2,
        logmod_slope=logslope,
        kept=kept,
        had_zeros=bool(np.any(z == 0)),
    )
    record.label = classify_component(record, thresholds)
    return record
