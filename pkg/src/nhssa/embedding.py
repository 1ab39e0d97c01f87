"""Trajectory-matrix embedding with arbitrary index translations.

Given a series of length m and an embedding (d, mbar), the translations are
kappa_i = i*mbar for i = 0..d-1 and the information vectors are

    Y_k = (f(k + kappa_0), ..., f(k + kappa_{d-1}))^t,   k = 0..K-1,

with K = m - kappa_{d-1} so that the largest accessed index is exactly m-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal_model import ComplexSeries

# Relative floor below which a singular value counts as numerically zero.
SINGULAR_ZERO_RTOL = 1e-13


@dataclass(frozen=True)
class EmbeddingConfig:
    """Dimension d and multiplicity mbar of the translation family."""

    d: int
    mbar: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("embedding dimension d must be at least 2")
        if self.mbar < 1:
            raise ValueError("multiplicity must be at least 1")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "mbar", int(self.mbar))

    @property
    def kappas(self) -> np.ndarray:
        return np.arange(self.d) * self.mbar

    @property
    def kappa_max(self) -> int:
        return (self.d - 1) * self.mbar

    def num_vectors(self, m: int) -> int:
        """Number K of information vectors available in a length-m series."""
        return m - self.kappa_max

    def min_length(self) -> int:
        # K >= 2 makes the trajectory pair non-empty; K >= mbar + 1 makes the
        # back-mapping cover every sample index.
        return self.kappa_max + max(2, self.mbar + 1)

    def require_feasible(self, m: int) -> None:
        if m < self.min_length():
            raise ValueError(
                f"series of length {m} too short for embedding (d={self.d}, "
                f"mbar={self.mbar}); need at least {self.min_length()} samples"
            )


@dataclass(frozen=True)
class TrajectoryPair:
    """Lagged trajectory matrices: x1 columns are the x0 columns shifted by one."""

    x0: np.ndarray
    x1: np.ndarray
    config: EmbeddingConfig

    @property
    def num_columns(self) -> int:
        return int(self.x0.shape[1])


@dataclass(frozen=True)
class CovarianceTriple:
    """Lag (g0), cross (g1), and lead (g2) covariance matrices."""

    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray


def build_information_vectors(f: ComplexSeries, cfg: EmbeddingConfig) -> np.ndarray:
    """Return the d x K matrix whose column k is the information vector Y_k."""
    cfg.require_feasible(len(f))
    k = cfg.num_vectors(len(f))
    idx = cfg.kappas[:, None] + np.arange(k)[None, :]
    return f.samples[idx]


def trajectory_matrices(f: ComplexSeries, cfg: EmbeddingConfig) -> TrajectoryPair:
    """Split the information vectors into the lag pair (x0, x1)."""
    ys = build_information_vectors(f, cfg)
    return pair_from_information_vectors(ys, cfg)


def pair_from_information_vectors(ys: np.ndarray, cfg: EmbeddingConfig) -> TrajectoryPair:
    if ys.shape[1] < 2:
        raise ValueError("need at least two information vectors")
    return TrajectoryPair(ys[:, :-1], ys[:, 1:], cfg)


def lag_covariances(tp: TrajectoryPair) -> CovarianceTriple:
    """Covariance triple normalized by the number of columns."""
    l = tp.num_columns
    g0 = tp.x0 @ tp.x0.conj().T / l
    g1 = tp.x1 @ tp.x0.conj().T / l
    g2 = tp.x1 @ tp.x1.conj().T / l
    return CovarianceTriple(g0, g1, g2)


@dataclass(frozen=True)
class ConditionGrid:
    """Condition numbers of x0 over an embedding grid, row-major over (d, mbar)."""

    d_values: tuple[int, ...]
    mbar_values: tuple[int, ...]
    cond: np.ndarray          # sigma_max/sigma_min of x0; +inf where infeasible
    cond_gram: np.ndarray     # squared: condition of the lag-covariance matrix
    best_d: int
    best_mbar: int

    def to_dict(self) -> dict:
        def cell(c):
            return float(c) if np.isfinite(c) else None

        return {
            "d": list(self.d_values),
            "mbar": list(self.mbar_values),
            "cond": [[cell(c) for c in row] for row in self.cond],
            "cond_gamma0": [[cell(c) for c in row] for row in self.cond_gram],
            "argmin": {"d": self.best_d, "mbar": self.best_mbar},
        }


def condition_grid_search(f: ComplexSeries, d_values, mbar_values) -> ConditionGrid:
    """Scan cond(x0) over a (d, mbar) grid and locate its minimum.

    A cell is feasible when it leaves at least d + 1 information vectors, so
    that x0 can have full row rank.  Rank-deficient cells (sigma_min below
    ``SINGULAR_ZERO_RTOL`` relative) are kept as +inf rather than failing.
    Ties are broken toward smaller mbar, then larger d.
    """
    d_values = tuple(int(d) for d in d_values)
    mbar_values = tuple(int(mb) for mb in mbar_values)
    if not d_values or not mbar_values:
        raise ValueError("empty grid ranges")
    cond = np.full((len(d_values), len(mbar_values)), np.inf)
    for i, d in enumerate(d_values):
        for j, mbar in enumerate(mbar_values):
            try:
                cfg = EmbeddingConfig(d, mbar)
            except ValueError:
                continue
            if cfg.num_vectors(len(f)) < d + 1 or len(f) < cfg.min_length():
                continue
            tp = trajectory_matrices(f, cfg)
            svals = np.linalg.svd(tp.x0, compute_uv=False)
            if svals[-1] <= SINGULAR_ZERO_RTOL * svals[0]:
                continue
            cond[i, j] = svals[0] / svals[-1]
    if not np.any(np.isfinite(cond)):
        raise ValueError("no feasible cell in the requested grid")
    bi, bj = min(
        ((i, j) for i in range(len(d_values)) for j in range(len(mbar_values))
         if np.isfinite(cond[i, j])),
        key=lambda ij: (cond[ij[0], ij[1]], ij[1], -ij[0]),
    )
    return ConditionGrid(
        d_values, mbar_values, cond, cond**2, d_values[bi], mbar_values[bj]
    )


def estimate_model_order(
    g0: np.ndarray,
    method: str = "gap",
    min_gap_ratio: float = 3.0,
    tau: float = 0.5,
) -> int:
    """Count the eigenvalues of the lag-covariance matrix above the noise floor.

    ``gap``: the order is the position of the largest relative drop
    lambda_k/lambda_{k+1}, accepted only when that ratio reaches
    ``min_gap_ratio`` (otherwise 0: no dominant gap).  ``floor``: eigenvalues
    exceeding (1 + tau) times the median of the lower half are counted.
    """
    g0 = np.asarray(g0)
    if g0.shape[0] < 2 or g0.shape[0] != g0.shape[1]:
        raise ValueError("covariance must be square with d >= 2")
    lam = np.linalg.eigvalsh(g0)[::-1]
    lam = np.clip(lam.real, 0.0, None)
    if lam[0] == 0.0:
        return 0
    if method == "gap":
        # Flooring kills spurious ratios inside the numerically-zero tail
        # while keeping the drop into that tail dominant.
        lam = np.maximum(lam, 1e-12 * lam[0])
        ratios = lam[:-1] / lam[1:]
        k = int(np.argmax(ratios))
        return k + 1 if ratios[k] >= min_gap_ratio else 0
    if method == "floor":
        tail = lam[lam.size // 2:]
        sigma2 = float(np.median(tail))
        return int(np.sum(lam > sigma2 * (1.0 + tau)))
    raise ValueError(f"unknown model-order method {method!r}")
