"""Regression and SVD-pencil estimation of the one-step transfer matrix.

The time shift between the lagged trajectory matrices is captured by the
least-squares matrix ``omega = g1 @ inv(g0)``.  Because the covariances are
often ill-conditioned, the numerically preferred route never forms omega:
both trajectory matrices are SVD-factored, the pair

    q = w1h_r @ w0_r,      r = inv(d1) @ u1^* @ u0 @ d0

is built from the truncated factors, and the generalized eigenproblem
``q @ phi = r @ phi @ diag(eigvals)`` delivers the same spectrum.  Mapping
information vectors through the eigenbasis yields one row per candidate
exponential.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .embedding import (
    SINGULAR_ZERO_RTOL,
    CovarianceTriple,
    TrajectoryPair,
    estimate_model_order,
)
from .signal_model import ComplexSeries


class SingularCovariance(ValueError):
    """Raised when g0 is numerically singular; use the SVD pencil instead."""


class SingularPencil(ValueError):
    """Raised when the (q, r) pencil is singular or ill-posed."""


@dataclass(frozen=True)
class FixedRank:
    """Retain exactly ``rank`` singular directions."""

    rank: int


@dataclass(frozen=True)
class GapRank:
    """Retain the numerically nonzero singular values, truncating only at a
    decisive spectral gap (consecutive ratio at least ``decisive_ratio``)."""

    zero_rtol: float = SINGULAR_ZERO_RTOL
    decisive_ratio: float = 1e3


RankPolicy = FixedRank | GapRank


@dataclass(frozen=True)
class PencilDecomposition:
    """Truncated SVD factors of (x0, x1), the (q, r) pencil, and its eigenpairs.

    ``vhat = u0 @ diag(d0) @ phi`` maps eigenbasis coordinates back to
    information-vector space.
    """

    u0: np.ndarray
    d0: np.ndarray
    w0h: np.ndarray
    u1: np.ndarray
    d1: np.ndarray
    w1h: np.ndarray
    q: np.ndarray
    r: np.ndarray
    eigvals: np.ndarray
    phi: np.ndarray
    vhat: np.ndarray
    rank_reduced: bool = False

    @property
    def rank(self) -> int:
        return int(self.eigvals.size)


@dataclass(frozen=True)
class ZSequences:
    """Eigenbasis image of the information vectors: row j tracks component j."""

    z: np.ndarray
    eigvals: np.ndarray


@dataclass(frozen=True)
class ArFit:
    """Least-squares AR(p) fit: coefficients (a1..ap) and the roots of the
    companion polynomial, sorted by modulus descending."""

    coefficients: np.ndarray
    eigenvalues: np.ndarray


def regression_estimator(cov: CovarianceTriple, max_condition: float = 1e12) -> np.ndarray:
    """Solve g1 = omega @ g0 for omega without forming an explicit inverse."""
    g0, g1 = cov.g0, cov.g1
    svals = np.linalg.svd(g0, compute_uv=False)
    if svals[-1] <= 0.0 or svals[0] / svals[-1] > max_condition:
        raise SingularCovariance(
            "lag covariance is numerically singular "
            f"(condition > {max_condition:g}); use the SVD pencil route"
        )
    # omega = g1 @ inv(g0) and g0 is Hermitian, so solve g0 x = g1^* and
    # conjugate-transpose back.
    return scipy.linalg.solve(g0, g1.conj().T, assume_a="her").conj().T


def cost_j(a: np.ndarray, tp: TrajectoryPair) -> float:
    """Mean squared one-step prediction error (1/L) sum_k ||Y_{k+1} - a Y_k||^2."""
    a = np.asarray(a)
    if a.shape != (tp.x0.shape[0], tp.x0.shape[0]):
        raise ValueError("matrix shape does not match the trajectory dimension")
    resid = tp.x1 - a @ tp.x0
    return float(np.linalg.norm(resid) ** 2 / tp.num_columns)


def minimal_cost(cov: CovarianceTriple) -> float:
    """Closed form of the regression minimum: tr(g2 - g1 inv(g0) g1^*)."""
    x = scipy.linalg.solve(cov.g0, cov.g1.conj().T, assume_a="her")
    return float(np.trace(cov.g2 - cov.g1 @ x).real)


def companion_ar_estimator(f: ComplexSeries, order: int) -> ArFit:
    """Least-squares AR(order) fit of f(k+1) on its ``order`` predecessors."""
    x = f.samples
    m = x.size
    if order < 1:
        raise ValueError("order must be at least 1")
    if m < order + 2:
        raise ValueError(f"need at least {order + 2} samples for AR({order})")
    rows = m - order
    design = np.empty((rows, order), dtype=np.complex128)
    for j in range(order):
        design[:, j] = x[order - 1 - j : m - 1 - j]
    target = x[order:]
    coeffs, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < order:
        raise ValueError("rank-deficient normal equations in AR fit")
    return _ar_fit_from_coefficients(coeffs)


def companion_ar_from_autocovariance(autocov, order: int) -> ArFit:
    """AR(order) fit from population autocovariances r(0..order).

    ``autocov[j]`` is E[f(k+j) conj(f(k))]; the Toeplitz normal equations
    sum_j a_j r(i-j) = r(i) are solved in the least-squares sense, so a
    noise-free (singular) system yields the minimum-norm limit solution.
    """
    r = np.asarray(autocov, dtype=np.complex128)
    if r.size < order + 1:
        raise ValueError("need autocovariances up to the requested order")
    toep = scipy.linalg.toeplitz(r[:order], r[:order].conj())
    coeffs = np.linalg.lstsq(toep, r[1 : order + 1], rcond=None)[0]
    return _ar_fit_from_coefficients(coeffs)


def _ar_fit_from_coefficients(coeffs: np.ndarray) -> ArFit:
    poly = np.concatenate(([1.0 + 0j], -coeffs))
    eigs = np.roots(poly)
    eigs = eigs[np.argsort(-np.abs(eigs), kind="stable")]
    return ArFit(coeffs, eigs)


def ar1_frequency(f: ComplexSeries) -> float:
    """First-order autoregressive frequency estimate, in radians per step."""
    x = f.samples
    if x.size < 3:
        raise ValueError("need at least 3 samples")
    den = float(np.sum(np.abs(x[:-1]) ** 2))
    if den == 0.0:
        raise ValueError("zero-energy series")
    lam = complex(np.sum(x[1:] * np.conj(x[:-1])) / den)
    if lam == 0:
        raise ValueError("degenerate lag product")
    return float(np.angle(lam))


def _retained_rank(svals: np.ndarray, policy: RankPolicy) -> int:
    nonzero = int(np.sum(svals > SINGULAR_ZERO_RTOL * svals[0])) if svals[0] > 0 else 0
    if isinstance(policy, FixedRank):
        if policy.rank < 1 or policy.rank > svals.size:
            raise ValueError(f"requested rank {policy.rank} outside 1..{svals.size}")
        return min(policy.rank, max(nonzero, 1))
    nonzero = int(np.sum(svals > policy.zero_rtol * svals[0])) if svals[0] > 0 else 0
    if nonzero < 2:
        return max(nonzero, 1)
    s = svals[:nonzero]
    ratios = s[:-1] / s[1:]
    k = int(np.argmax(ratios))
    if ratios[k] >= policy.decisive_ratio:
        return k + 1
    return nonzero


def svd_pencil(tp: TrajectoryPair, rank_policy: RankPolicy | None = None) -> PencilDecomposition:
    """Factor the trajectory pair and solve the stabilized eigenvalue pencil."""
    policy = rank_policy if rank_policy is not None else GapRank()
    if isinstance(policy, FixedRank) and policy.rank > min(tp.x0.shape):
        raise ValueError(
            f"rank {policy.rank} exceeds the trajectory size {min(tp.x0.shape)}"
        )
    u0, d0, w0h = np.linalg.svd(tp.x0, full_matrices=False)
    u1, d1, w1h = np.linalg.svd(tp.x1, full_matrices=False)
    r_req = _retained_rank(d0, policy)
    # Zero singular values of x1 inside the retained block force a reduction.
    rank1 = int(np.sum(d1 > SINGULAR_ZERO_RTOL * d1[0])) if d1[0] > 0 else 0
    rank = min(r_req, max(rank1, 1))
    reduced = rank < r_req or (isinstance(policy, FixedRank) and rank < policy.rank)
    if reduced:
        warnings.warn(
            f"retained rank reduced to {rank} (rank-deficient trajectory)",
            RuntimeWarning,
            stacklevel=2,
        )
    u0, d0, w0h = u0[:, :rank], d0[:rank], w0h[:rank]
    u1, d1, w1h = u1[:, :rank], d1[:rank], w1h[:rank]
    q = w1h @ w0h.conj().T
    r = (u1.conj().T @ u0) * (d0[None, :] / d1[:, None])
    eigvals, phi = generalized_eig(q, r)
    vhat = (u0 * d0[None, :]) @ phi
    # Normalize the eigenbasis columns (unit norm, real-positive lead) and
    # carry the same scaling into phi so z = phi^-1 d0^-1 u0^* Y stays the
    # eigenbasis image; this makes z rows deterministic and data-scaled.
    for j in range(vhat.shape[1]):
        nrm = np.linalg.norm(vhat[:, j])
        if nrm == 0.0:
            raise SingularPencil("degenerate eigenbasis column")
        lead = vhat[np.flatnonzero(np.abs(vhat[:, j]) > 1e-12 * nrm)[0], j]
        scale = (lead.conjugate() / abs(lead)) / nrm
        vhat[:, j] *= scale
        phi[:, j] *= scale
    return PencilDecomposition(u0, d0, w0h, u1, d1, w1h, q, r, eigvals, phi, vhat, reduced)


def generalized_eig(q: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve q phi = r phi diag(eigvals) with deterministic normalization.

    Eigenpairs come back sorted by modulus descending (argument as the
    tie-breaker) and each eigenvector has unit norm with its first
    significant entry rotated to the positive real axis.
    """
    q = np.asarray(q, dtype=np.complex128)
    r = np.asarray(r, dtype=np.complex128)
    if q.shape != r.shape or q.shape[0] != q.shape[1]:
        raise ValueError("pencil matrices must be square and equally sized")
    eigvals, phi = scipy.linalg.eig(q, r)
    if not np.all(np.isfinite(eigvals)):
        raise SingularPencil("singular pencil: non-finite generalized eigenvalues")
    order = np.lexsort((np.angle(eigvals), -np.abs(eigvals)))
    eigvals = eigvals[order]
    phi = phi[:, order]
    for j in range(phi.shape[1]):
        col = phi[:, j]
        nrm = np.linalg.norm(col)
        if nrm == 0.0:
            raise SingularPencil("zero generalized eigenvector")
        col = col / nrm
        lead = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        phi[:, j] = col * (lead.conjugate() / abs(lead))
    return eigvals, phi


def z_sequences(pd: PencilDecomposition, info_vectors: np.ndarray) -> ZSequences:
    """Map every information vector into the eigenbasis: z = phi^-1 d0^-1 u0^* Y."""
    proj = pd.u0.conj().T @ info_vectors
    proj /= pd.d0[:, None]
    try:
        z = scipy.linalg.solve(pd.phi, proj)
    except scipy.linalg.LinAlgError as exc:
        raise SingularPencil(f"degenerate eigenbasis: {exc}") from exc
    if not np.all(np.isfinite(z)):
        raise SingularPencil("non-finite eigenbasis image")
    return ZSequences(z, pd.eigvals)


def threshold_filter(eigvals: np.ndarray, lambda_c: float) -> tuple[list[int], list[int]]:
    """Split row indices by eigenvalue modulus at the cutoff ``lambda_c``."""
    if not 0.0 < lambda_c < 1.5:
        raise ValueError("lambda_c must lie in (0, 1.5)")
    mods = np.abs(np.asarray(eigvals))
    kept = [int(j) for j in np.flatnonzero(mods >= lambda_c)]
    discarded = [int(j) for j in np.flatnonzero(mods < lambda_c)]
    return kept, discarded


def ssa_principal_components(tp: TrajectoryPair) -> tuple[np.ndarray, np.ndarray]:
    """Classic SSA: eigenvectors of the lag covariance and the principal
    components p = u^* x0 (rows mutually orthogonal)."""
    g0 = tp.x0 @ tp.x0.conj().T / tp.num_columns
    lam, u = np.linalg.eigh(g0)
    order = np.argsort(lam)[::-1]
    u = u[:, order]
    return u, u.conj().T @ tp.x0


def detect_degenerate_eigvals(eigvals: np.ndarray, rtol: float = 1e-8) -> bool:
    """True when two eigenvalues nearly coincide (defective-basis risk)."""
    lam = np.asarray(eigvals)
    if lam.size < 2:
        return False
    scale = float(np.max(np.abs(lam)))
    diff = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(diff, np.inf)
    return bool(np.min(diff) < rtol * max(scale, 1.0))


__all__ = [
    "ArFit",
    "CovarianceTriple",
    "FixedRank",
    "GapRank",
    "PencilDecomposition",
    "RankPolicy",
    "SingularCovariance",
    "SingularPencil",
    "ZSequences",
    "ar1_frequency",
    "companion_ar_estimator",
    "companion_ar_from_autocovariance",
    "cost_j",
    "detect_degenerate_eigvals",
    "estimate_model_order",
    "generalized_eig",
    "minimal_cost",
    "regression_estimator",
    "ssa_principal_components",
    "svd_pencil",
    "threshold_filter",
    "z_sequences",
]
