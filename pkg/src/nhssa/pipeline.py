"""End-to-end decomposition: embed, factor, map, classify, refine, rebuild.

The result is a session object that the CLI writes to disk and the inspector
service republishes; nothing downstream ever recomputes the pencil.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import core
from .components import (
    LABEL_NOISE,
    ClassifierThresholds,
    ComponentRecord,
    build_component_record,
)
from .embedding import (
    ConditionGrid,
    EmbeddingConfig,
    build_information_vectors,
    condition_grid_search,
    estimate_model_order,
    lag_covariances,
    pair_from_information_vectors,
)
from .esprit import refine_single
from .reconstruction import Selection, component_to_series, group_reconstruct
from .seriesio import series_from_json_dict, series_to_json_dict
from .signal_model import ComplexSeries

SCHEMA = "nhssa/1"

# Two opposite-signed row frequencies this close in magnitude (cycles) are
# reported as one positive frequency.
PAIR_MERGE_TOL = 0.005
_ZERO_CYCLES = 1e-9

DEFAULT_MBAR_RANGE = range(1, 13)


def parse_rank_policy(text: str) -> core.RankPolicy:
    """Parse "gap" or "fixed:N" into a rank policy."""
    if text == "gap":
        return core.GapRank()
    if text.startswith("fixed:"):
        return core.FixedRank(int(text.split(":", 1)[1]))
    raise ValueError(f"unknown rank policy {text!r} (use 'gap' or 'fixed:N')")


def rank_policy_name(policy: core.RankPolicy) -> str:
    if isinstance(policy, core.FixedRank):
        return f"fixed:{policy.rank}"
    return "gap"


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of the decomposition pipeline.

    Leave ``d``/``mbar`` unset (or set ``auto_grid``) to pick them by the
    condition-number grid search.
    """

    d: int | None = None
    mbar: int | None = None
    auto_grid: bool = False
    lambda_c: float = 0.8
    rank_policy: core.RankPolicy = field(default_factory=core.GapRank)
    thresholds: ClassifierThresholds = field(default_factory=ClassifierThresholds)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.lambda_c < 1.5:
            raise ValueError("lambda_c must lie in (0, 1.5)")

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "mbar": self.mbar,
            "auto_grid": self.auto_grid,
            "lambda_c": self.lambda_c,
            "rank_policy": rank_policy_name(self.rank_policy),
            "thresholds": self.thresholds.to_dict(),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class FrequencyEntry:
    """One reported frequency with the rows that produced it."""

    cycles: float
    rows: tuple[int, ...]
    paired: bool

    def to_dict(self) -> dict:
        return {"cycles": self.cycles, "rows": list(self.rows), "paired": self.paired}


@dataclass
class Session:
    """Everything a decomposition produced, ready for inspection."""

    session_id: str
    config: PipelineConfig
    series: ComplexSeries
    embedding: EmbeddingConfig
    pencil: core.PencilDecomposition
    z: np.ndarray
    records: list[ComponentRecord]
    selection: Selection
    component_series: list[ComplexSeries]
    frequencies: list[FrequencyEntry]
    signal_estimate: ComplexSeries
    noise_estimate: ComplexSeries
    grid: ConditionGrid | None = None
    degenerate_eigvals: bool = False
    version: int = 0
    audit: list[dict] = field(default_factory=list)

    @property
    def kept_rows(self) -> list[int]:
        return [rec.index for rec in self.records if rec.kept]


def _auto_embedding(series: ComplexSeries, config: PipelineConfig) -> tuple[EmbeddingConfig, ConditionGrid]:
    m = len(series)
    if config.d is not None:
        d_values = [config.d]
    else:
        probe_d = 18
        while probe_d > 3 and EmbeddingConfig(probe_d, 1).min_length() > m:
            probe_d -= 1
        tp = pair_from_information_vectors(
            build_information_vectors(series, EmbeddingConfig(probe_d, 1)),
            EmbeddingConfig(probe_d, 1),
        )
        order = estimate_model_order(lag_covariances(tp).g0)
        order = max(order, 2)
        lo, hi = 2 * order + 2, 6 * order
        d_values = [d for d in range(lo, hi + 1) if EmbeddingConfig(d, 1).min_length() <= m]
        if not d_values:
            d_values = [d for d in range(2, lo) if EmbeddingConfig(d, 1).min_length() <= m][-1:]
        if not d_values:
            raise ValueError(f"series of length {m} too short for any embedding")
    mbar_values = [config.mbar] if config.mbar is not None else list(DEFAULT_MBAR_RANGE)
    grid = condition_grid_search(series, d_values, mbar_values)
    return EmbeddingConfig(grid.best_d, grid.best_mbar), grid


def merge_frequency_estimates(
    records: list[ComponentRecord], rows: set[int], real_input: bool
) -> list[FrequencyEntry]:
    """Collapse per-row signed frequencies into the reported list.

    Real input: opposite-signed rows within ``PAIR_MERGE_TOL`` cycles merge
    into one positive frequency; leftovers are reported unpaired by
    magnitude.  Complex input keeps signed per-row values.
    """
    entries: list[FrequencyEntry] = []
    by_row = {j: records[j].cycles for j in sorted(rows) if records[j].cycles is not None}
    if not real_input:
        for j, cyc in by_row.items():
            entries.append(FrequencyEntry(float(cyc), (j,), False))
        return sorted(entries, key=lambda e: e.cycles)
    pos = [(j, c) for j, c in by_row.items() if c > _ZERO_CYCLES]
    neg = [(j, -c) for j, c in by_row.items() if c < -_ZERO_CYCLES]
    zero = [(j, abs(c)) for j, c in by_row.items() if -_ZERO_CYCLES <= c <= _ZERO_CYCLES]
    while pos and neg:
        gaps = [
            (abs(p[1] - n[1]), i, k)
            for i, p in enumerate(pos)
            for k, n in enumerate(neg)
        ]
        gap, i, k = min(gaps)
        if gap > PAIR_MERGE_TOL:
            break
        pj, pc = pos.pop(i)
        nj, nc = neg.pop(k)
        entries.append(FrequencyEntry(0.5 * (pc + nc), (pj, nj), True))
    for j, c in pos + neg + zero:
        entries.append(FrequencyEntry(float(c), (j,), False))
    return sorted(entries, key=lambda e: e.cycles)


def _session_id(series: ComplexSeries, config: PipelineConfig) -> str:
    payload = json.dumps(
        [series_to_json_dict(series), config.to_dict()], sort_keys=True
    ).encode()
    return hashlib.sha256(payload).hexdigest()[:12]


def decompose(series: ComplexSeries, config: PipelineConfig | None = None) -> Session:
    """Run the full pipeline on a series and assemble the session."""
    config = config if config is not None else PipelineConfig()
    grid = None
    if config.auto_grid or config.d is None or config.mbar is None:
        embedding, grid = _auto_embedding(series, config)
    else:
        embedding = EmbeddingConfig(config.d, config.mbar)
    embedding.require_feasible(len(series))

    ys = build_information_vectors(series, embedding)
    tp = pair_from_information_vectors(ys, embedding)
    pencil = core.svd_pencil(tp, config.rank_policy)
    z = core.z_sequences(pencil, ys).z
    kept, _ = core.threshold_filter(pencil.eigvals, config.lambda_c)
    kept_set = set(kept)

    records = []
    for j in range(pencil.rank):
        rec = build_component_record(
            j, pencil.eigvals[j], z[j], config.thresholds, kept=j in kept_set
        )
        cycles, source = refine_single(z[j])
        rec.cycles = float(cycles)
        rec.freq_source = source
        records.append(rec)

    signal_rows = {j for j in kept_set if records[j].label != LABEL_NOISE}
    noise_rows = set(range(pencil.rank)) - signal_rows
    selection = Selection(signal_rows, noise_rows, provenance="Auto")

    component_series = [
        component_to_series(pencil, z, j, embedding) for j in range(pencil.rank)
    ]
    shat, what = group_reconstruct(
        selection, pencil, z, embedding, series, component_series
    )
    frequencies = merge_frequency_estimates(records, signal_rows, series.is_real)

    return Session(
        session_id=_session_id(series, config),
        config=replace(config, d=embedding.d, mbar=embedding.mbar),
        series=series,
        embedding=embedding,
        pencil=pencil,
        z=z,
        records=records,
        selection=selection,
        component_series=component_series,
        frequencies=frequencies,
        signal_estimate=shat,
        noise_estimate=what,
        grid=grid,
        degenerate_eigvals=core.detect_degenerate_eigvals(pencil.eigvals),
    )


def refresh_derived(session: Session) -> None:
    """Recompute selection-driven outputs after a label change."""
    signal_rows = {
        rec.index
        for rec in session.records
        if rec.label != LABEL_NOISE and (rec.kept or rec.label_source == "Human")
    }
    noise_rows = set(range(session.pencil.rank)) - signal_rows
    provenance = (
        "Human"
        if any(rec.label_source == "Human" for rec in session.records)
        else "Auto"
    )
    session.selection = Selection(signal_rows, noise_rows, provenance)
    shat, what = group_reconstruct(
        session.selection,
        session.pencil,
        session.z,
        session.embedding,
        session.series,
        session.component_series,
    )
    session.signal_estimate = shat
    session.noise_estimate = what
    session.frequencies = merge_frequency_estimates(
        session.records, signal_rows, session.series.is_real
    )


def _complex_matrix_to_json(mat: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in mat]


def _complex_matrix_from_json(data: list) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def session_to_document(session: Session) -> dict:
    """JSON-ready dictionary with the full session state."""
    pencil = session.pencil
    return {
        "schema": SCHEMA,
        "id": session.session_id,
        "version": session.version,
        "config": session.config.to_dict(),
        "series": series_to_json_dict(session.series),
        "embedding": {
            "d": session.embedding.d,
            "mbar": session.embedding.mbar,
            "kappa_max": int(session.embedding.kappa_max),
            "num_vectors": int(session.z.shape[1]),
        },
        "pencil": {
            "retained_rank": pencil.rank,
            "rank_reduced": pencil.rank_reduced,
            "degenerate_eigvals": session.degenerate_eigvals,
            "eigvals": [[float(v.real), float(v.imag)] for v in pencil.eigvals],
            "abs_eigvals": [float(a) for a in np.abs(pencil.eigvals)],
            "singular_values": [float(s) for s in pencil.d0],
            "singular_values_lead": [float(s) for s in pencil.d1],
            "vhat": _complex_matrix_to_json(pencil.vhat),
            "z": _complex_matrix_to_json(session.z),
        },
        "components": [rec.to_dict() for rec in session.records],
        "selection": {
            "signal": sorted(session.selection.signal_rows),
            "noise": sorted(session.selection.noise_rows),
            "provenance": session.selection.provenance,
        },
        "derived": {
            "frequencies": [entry.to_dict() for entry in session.frequencies],
            "shat": series_to_json_dict(session.signal_estimate),
            "what": series_to_json_dict(session.noise_estimate),
        },
        "grid": session.grid.to_dict() if session.grid is not None else None,
        "audit": list(session.audit),
    }


def session_from_document(doc: dict) -> Session:
    """Rebuild a session from its JSON document (used by the inspector)."""
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported session schema {doc.get('schema')!r}")
    cfg_doc = doc["config"]
    thresholds = ClassifierThresholds(**cfg_doc["thresholds"])
    config = PipelineConfig(
        d=cfg_doc["d"],
        mbar=cfg_doc["mbar"],
        auto_grid=cfg_doc["auto_grid"],
        lambda_c=cfg_doc["lambda_c"],
        rank_policy=parse_rank_policy(cfg_doc["rank_policy"]),
        thresholds=thresholds,
        seed=cfg_doc["seed"],
    )
    series = series_from_json_dict(doc["series"])
    embedding = EmbeddingConfig(doc["embedding"]["d"], doc["embedding"]["mbar"])
    pdoc = doc["pencil"]
    eigvals = np.asarray([complex(re, im) for re, im in pdoc["eigvals"]])
    vhat = _complex_matrix_from_json(pdoc["vhat"])
    z = _complex_matrix_from_json(pdoc["z"])
    rank = int(pdoc["retained_rank"])
    placeholder = np.zeros((0, 0))
    pencil = core.PencilDecomposition(
        u0=placeholder,
        d0=np.asarray(pdoc["singular_values"]),
        w0h=placeholder,
        u1=placeholder,
        d1=np.asarray(pdoc["singular_values_lead"]),
        w1h=placeholder,
        q=placeholder,
        r=placeholder,
        eigvals=eigvals,
        phi=np.zeros((rank, rank)),
        vhat=vhat,
        rank_reduced=bool(pdoc["rank_reduced"]),
    )
    records = []
    for cdoc in doc["components"]:
        j = int(cdoc["index"])
        rec = build_component_record(
            j, complex(*cdoc["eigval"]), z[j], thresholds, kept=bool(cdoc["kept"])
        )
        rec.label = cdoc["label"]
        rec.label_source = cdoc["label_source"]
        rec.cycles = cdoc["cycles"]
        rec.freq_source = cdoc["freq_source"]
        records.append(rec)
    selection = Selection(
        set(doc["selection"]["signal"]),
        set(doc["selection"]["noise"]),
        doc["selection"]["provenance"],
    )
    component_series = [
        component_to_series(pencil, z, j, embedding) for j in range(rank)
    ]
    frequencies = [
        FrequencyEntry(e["cycles"], tuple(e["rows"]), e["paired"])
        for e in doc["derived"]["frequencies"]
    ]
    return Session(
        session_id=doc["id"],
        config=config,
        series=series,
        embedding=embedding,
        pencil=pencil,
        z=z,
        records=records,
        selection=selection,
        component_series=component_series,
        frequencies=frequencies,
        signal_estimate=series_from_json_dict(doc["derived"]["shat"]),
        noise_estimate=series_from_json_dict(doc["derived"]["what"]),
        degenerate_eigvals=bool(pdoc["degenerate_eigvals"]),
        version=int(doc["version"]),
        audit=list(doc["audit"]),
    )


def dump_session_json(session: Session) -> str:
    """Canonical JSON text (sorted keys, compact) for byte-stable reruns."""
    return json.dumps(session_to_document(session), sort_keys=True, separators=(",", ":"))
