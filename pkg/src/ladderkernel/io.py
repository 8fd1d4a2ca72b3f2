"""CSV and JSON readers/writers for series, kernels, histograms and matrices.

All files are UTF-8 with LF line endings; CSVs carry a header row and
floats are written with full round-trip precision.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dynamics import TimeSeries
from .errors import ContractError
from .kernel import Kernel
from .spectral import EigenbasisMatrix, Histogram

__all__ = [
    "write_table",
    "read_table",
    "write_json",
    "read_json",
    "write_timeseries",
    "read_timeseries",
    "write_kernel",
    "read_kernel",
    "write_histogram",
    "write_triplets",
]


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_table(path, header, columns) -> Path:
    """Write equally long ``columns`` under ``header``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c) for c in columns]
    if len(header) != len(cols):
        raise ContractError("header and column count differ")
    if len({len(c) for c in cols}) > 1:
        raise ContractError("columns have different lengths")
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_fmt(x) for x in row])
    return path


def read_table(path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ContractError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    if any(len(r) != len(header) for r in body):
        raise ContractError(f"{path}: ragged rows")
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return header, data


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def sidecar(path) -> Path:
    return Path(path).with_suffix(".json")


def write_timeseries(path, series: TimeSeries) -> tuple[Path, Path]:
    """CSV (t, value) plus a JSON sidecar with dt and the metadata."""
    p = write_table(path, ["t", "value"], [series.times, series.values])
    meta = write_json(sidecar(path), {"dt": series.dt, "n": len(series), **series.meta})
    return p, meta


def _uniform_dt(t, path):
    if len(t) < 2:
        raise ContractError(f"{path}: need at least two samples")
    steps = np.diff(t)
    dt = float(steps.mean())
    if abs(t[0]) > 1e-12 * max(1.0, dt) or np.abs(steps - dt).max() > 1e-9 * max(1.0, dt):
        raise ContractError(f"{path}: grid is not uniform from t = 0")
    return dt


def read_timeseries(path) -> TimeSeries:
    header, data = read_table(path)
    if len(header) != 2:
        raise ContractError(f"{path}: expected columns (t, value)")
    dt = _uniform_dt(data[:, 0], path)
    meta = {}
    side = sidecar(path)
    if side.exists():
        meta = read_json(side)
        dt = float(meta.pop("dt", dt))
        meta.pop("n", None)
    return TimeSeries(dt, data[:, 1], meta)


def write_kernel(path, k: Kernel) -> Path:
    return write_table(path, ["tau", "K"], [k.taus, k.values])


def read_kernel(path) -> Kernel:
    header, data = read_table(path)
    return Kernel(_uniform_dt(data[:, 0], path), data[:, 1])


def write_histogram(path, h: Histogram) -> Path:
    return write_table(path, ["bin_center", "value"], [h.centers, h.values])


def write_triplets(path, m: EigenbasisMatrix, threshold: float = 1e-10) -> Path:
    """Above-threshold elements as (row, col, re, im) in energy order."""
    r, c, v = m.triplets(threshold)
    v = np.asarray(v, dtype=complex)
    return write_table(path, ["row", "col", "re", "im"], [r, c, v.real, v.imag])
