"""Result serialization: one CSV per series plus ``metadata.json``."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .scenarios import ResultSet


def format_number(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".12g")


def series_csv(series) -> str:
    lines = []
    names = [series.x_name, *series.columns]
    lines.append(",".join(names))
    cols = [np.asarray(series.x)] + [np.asarray(c) for c in series.columns.values()]
    for row in zip(*cols):
        lines.append(",".join(format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_results(result: ResultSet, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, series in result.series.items():
        path = out / f"{name}.csv"
        path.write_text(series_csv(series))
        written.append(path)
    meta = dict(result.metadata)
    meta["scalars"] = result.scalars
    meta["series_files"] = [p.name for p in written]
    path = out / "metadata.json"
    path.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    written.append(path)
    return written


def read_series(path) -> dict:
    """Load a CSV written by :func:`write_results` into named float arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body]) if body else np.empty((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}
