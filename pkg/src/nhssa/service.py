"""HTTP session service for the browser inspector.

The service owns one loaded session.  Reads are side-effect free; label
writes are serialized under a lock, bump a monotone version, and recompute
the selection-derived outputs before responding, so every payload reflects
exactly one version.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .components import LABELS, SOURCE_HUMAN
from .pipeline import (
    Session,
    dump_session_json,
    refresh_derived,
    session_from_document,
)
from .seriesio import series_to_json_dict


def _series_payload(series, stride: int = 1) -> dict:
    doc = series_to_json_dict(series)
    if stride > 1:
        doc["samples"] = doc["samples"][::stride]
        doc["stride"] = stride
    return doc


class SessionStore:
    """Thread-safe holder of one session plus its audit trail."""

    def __init__(self, session: Session, path: Path | None = None):
        self.session = session
        self.path = path
        self._lock = threading.Lock()

    @classmethod
    def load(cls, path) -> "SessionStore":
        path = Path(path)
        doc = json.loads(path.read_text())
        return cls(session_from_document(doc), path)

    # -- read snapshots ---------------------------------------------------

    def summary(self) -> dict:
        with self._lock:
            s = self.session
            return {
                "version": s.version,
                "id": s.session_id,
                "schema": "nhssa/1",
                "config": s.config.to_dict(),
                "embedding": {
                    "d": s.embedding.d,
                    "mbar": s.embedding.mbar,
                    "num_vectors": int(s.z.shape[1]),
                },
                "retained_rank": s.pencil.rank,
                "length": len(s.series),
                "series": _series_payload(s.series),
                "labels": {str(rec.index): rec.label for rec in s.records},
            }

    def components(self) -> dict:
        with self._lock:
            s = self.session
            return {
                "version": s.version,
                "components": [rec.to_dict() for rec in s.records],
            }

    def component_series(self, index: int, stride: int = 1) -> dict | None:
        with self._lock:
            s = self.session
            if not 0 <= index < len(s.records):
                return None
            rec = s.records[index]
            z = rec.z_row[::stride] if stride > 1 else rec.z_row
            phase = rec.phase[::stride] if stride > 1 else rec.phase
            return {
                "version": s.version,
                "index": index,
                "z": [[float(v.real), float(v.imag)] for v in z],
                "phase": [float(p) for p in phase],
                "wrap_positions": list(rec.wrap_positions),
                "series": _series_payload(s.component_series[index], stride),
                "modulus_mean": rec.modulus_mean,
                "modulus_std": rec.modulus_std,
            }

    def reconstruction(self) -> dict:
        with self._lock:
            s = self.session
            return {
                "version": s.version,
                "frequencies": [entry.to_dict() for entry in s.frequencies],
                "selection": {
                    "signal": sorted(s.selection.signal_rows),
                    "noise": sorted(s.selection.noise_rows),
                    "provenance": s.selection.provenance,
                },
                "shat": _series_payload(s.signal_estimate),
                "what": _series_payload(s.noise_estimate),
                "source": _series_payload(s.series),
            }

    def audit_log(self) -> dict:
        with self._lock:
            return {"version": self.session.version, "audit": list(self.session.audit)}

    # -- mutations ---------------------------------------------------------

    def set_label(self, index: int, label: str, expected_version: int | None):
        """Apply a human label; returns (status, payload)."""
        with self._lock:
            s = self.session
            if not 0 <= index < len(s.records):
                return 404, {"error": f"unknown component {index}"}
            if label not in LABELS:
                return 400, {"error": f"invalid label {label!r}"}
            if expected_version is not None and expected_version != s.version:
                return 409, {
                    "error": "stale version",
                    "version": s.version,
                }
            rec = s.records[index]
            old = rec.label
            rec.label = label
            rec.label_source = SOURCE_HUMAN
            s.version += 1
            s.audit.append(
                {
                    "timestamp": datetime.now(timezone.utc).isoformat(),
                    "component": index,
                    "old": old,
                    "new": label,
                    "source": SOURCE_HUMAN,
                }
            )
            refresh_derived(s)
            return 200, {
                "version": s.version,
                "component": rec.to_dict(),
                "frequencies": [entry.to_dict() for entry in s.frequencies],
            }

    def save(self) -> dict:
        with self._lock:
            if self.path is None:
                return {"error": "session has no backing file"}
            self.path.write_text(dump_session_json(self.session) + "\n")
            return {"version": self.session.version, "path": str(self.path)}


def create_app(store: SessionStore, static_dir=None) -> FastAPI:
    """Assemble the inspector API (and optionally mount the built UI at /)."""
    app = FastAPI(title="nhssa inspector", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/session")
    def get_session():
        return store.summary()

    @app.get("/api/components")
    def get_components():
        return store.components()

    @app.get("/api/components/{index}/series")
    def get_component_series(index: int, stride: int = 1):
        payload = store.component_series(index, max(1, stride))
        if payload is None:
            return JSONResponse({"error": f"unknown component {index}"}, status_code=404)
        return payload

    @app.get("/api/reconstruction")
    def get_reconstruction():
        return store.reconstruction()

    @app.get("/api/audit")
    def get_audit():
        return store.audit_log()

    @app.post("/api/components/{index}/label")
    def post_label(index: int, body: dict):
        label = body.get("label")
        version = body.get("version")
        status, payload = store.set_label(index, label, version)
        return JSONResponse(payload, status_code=status)

    @app.post("/api/save")
    def post_save():
        return store.save()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
