"""Reading and writing time series files.

Two formats are supported:

* CSV with header ``k,re,im`` (the ``im`` column may be omitted and defaults
  to zero); ``k`` must be consecutive integers.
* JSON ``{"start_index": 0, "samples": [[re, im], ...]}``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .signal_model import ComplexSeries


def series_to_json_dict(series: ComplexSeries) -> dict:
    return {
        "start_index": series.start_index,
        "samples": [[float(z.real), float(z.imag)] for z in series.samples],
    }


def series_from_json_dict(doc: dict) -> ComplexSeries:
    samples = np.asarray(doc["samples"], dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise ValueError("JSON samples must be a list of [re, im] pairs")
    return ComplexSeries(samples[:, 0] + 1j * samples[:, 1], int(doc.get("start_index", 0)))


def _read_csv(path: Path) -> ComplexSeries:
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError(f"{path}: empty series file")
    header = [cell.strip().lower() for cell in rows[0]]
    if header[:2] != ["k", "re"] or (len(header) > 2 and header[2] != "im"):
        raise ValueError(f"{path}: expected header k,re[,im]")
    ks, values = [], []
    for row in rows[1:]:
        ks.append(int(row[0]))
        re = float(row[1])
        im = float(row[2]) if len(row) > 2 and row[2].strip() else 0.0
        values.append(re + 1j * im)
    if not values:
        raise ValueError(f"{path}: no samples")
    if any(b - a != 1 for a, b in zip(ks, ks[1:])):
        raise ValueError(f"{path}: sample indices must be consecutive")
    return ComplexSeries(np.asarray(values), ks[0])


def read_series(path) -> ComplexSeries:
    """Load a series from CSV or JSON, deciding by file suffix."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if path.suffix.lower() == ".json":
        with path.open() as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: invalid JSON series ({exc})") from exc
        return series_from_json_dict(doc)
    return _read_csv(path)


def write_series(series: ComplexSeries, path) -> None:
    """Write a series as CSV or JSON, deciding by file suffix."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with path.open("w") as fh:
            json.dump(series_to_json_dict(series), fh, sort_keys=True)
            fh.write("\n")
        return
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "re", "im"])
        for offset, z in enumerate(series.samples):
            writer.writerow([series.start_index + offset, repr(float(z.real)), repr(float(z.imag))])
