"""Back-mapping eigenbasis rows to the sample domain and grouping them.

Row j spans the rank-one trajectory array ``vhat[:, j] * z[j, :]``; averaging
its entries over equal sample index ``kappa_s + k`` (plain anti-diagonal
averaging when the multiplicity is 1) returns a length-m series.  Grouping
sums these series; whatever the retained subspace missed is folded into the
noise part so the split is an exact identity.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import PencilDecomposition
from .embedding import EmbeddingConfig
from .signal_model import ComplexSeries


@dataclass
class Selection:
    """Disjoint split of the retained rows into signal and noise groups."""

    signal_rows: set[int]
    noise_rows: set[int]
    provenance: str = "Auto"

    def __post_init__(self):
        self.signal_rows = set(int(j) for j in self.signal_rows)
        self.noise_rows = set(int(j) for j in self.noise_rows)
        if self.signal_rows & self.noise_rows:
            raise ValueError("signal and noise row sets overlap")

    def all_rows(self) -> set[int]:
        return self.signal_rows | self.noise_rows


def component_to_series(
    pd: PencilDecomposition, z: np.ndarray, j: int, cfg: EmbeddingConfig
) -> ComplexSeries:
    """Average the rank-one trajectory array of row j back to sample space."""
    if not 0 <= j < pd.rank:
        raise ValueError(f"row {j} outside the retained rank {pd.rank}")
    num_vectors = z.shape[1]
    if num_vectors - 1 < cfg.mbar:
        raise ValueError("embedding too short to cover every sample index")
    m = cfg.kappa_max + num_vectors
    t_index = (cfg.kappas[:, None] + np.arange(num_vectors)[None, :]).ravel()
    array = np.outer(pd.vhat[:, j], z[j]).ravel()
    sums = np.bincount(t_index, weights=array.real, minlength=m).astype(np.complex128)
    sums += 1j * np.bincount(t_index, weights=array.imag, minlength=m)
    counts = np.bincount(t_index, minlength=m)
    return ComplexSeries(sums / counts)


def group_reconstruct(
    selection: Selection,
    pd: PencilDecomposition,
    z: np.ndarray,
    cfg: EmbeddingConfig,
    f: ComplexSeries,
    component_series: list[ComplexSeries] | None = None,
) -> tuple[ComplexSeries, ComplexSeries]:
    """Split f into (signal_estimate, noise_estimate) for a row selection.

    The residual of the truncated subspace joins the noise part, so the two
    outputs always sum back to f exactly.  For a real input, a negligible
    imaginary residue on the signal estimate (conjugate-pairing roundoff) is
    zeroed.
    """
    if component_series is None:
        component_series = [component_to_series(pd, z, j, cfg) for j in range(pd.rank)]
    if not selection.signal_rows:
        warnings.warn("empty signal selection: signal estimate is zero", RuntimeWarning)
    shat = np.zeros(len(f), dtype=np.complex128)
    for j in sorted(selection.signal_rows):
        shat += component_series[j].samples
    if f.is_real:
        imag_energy = np.linalg.norm(shat.imag)
        if imag_energy <= 1e-8 * max(np.linalg.norm(shat), 1e-300):
            shat = shat.real.astype(np.complex128)
    what = f.samples - shat
    return (
        ComplexSeries(shat, f.start_index),
        ComplexSeries(what, f.start_index),
    )
