"""JSON and CSV persistence.

JSON is the canonical format; CSV files are tidy derivatives for plotting.
Floats are written with ``repr`` precision (shortest round-trip form, at
most 17 significant digits), so load/save round-trips are exact.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .core import FrameSystem
from .exceptions import InvalidInput
from .geometry import DensityReport, PointGeometry
from .measure import MeasureReport
from .thinning import ThinningTrace

FORMAT_VERSION = 1


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    """Deterministic JSON text; NaN and infinities are rejected."""
    return json.dumps(obj, default=_default, sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(config):
    text = json.dumps(config, default=_default, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def provenance(seed, config, theory_constants=None):
    """Provenance block embedded in every CLI output."""
    return {
        "tool_version": __version__,
        "seed": seed,
        "config_hash": config_hash(config),
        "theory_constants": theory_constants or {},
    }


def frame_to_dict(F):
    vectors = [[[float(z.real), float(z.imag)] for z in row] for row in F.vectors]
    meta = F.meta
    if meta is not None:
        try:
            json.dumps(meta, default=_default, allow_nan=False)
        except (TypeError, ValueError):
            meta = None
    return {
        "version": FORMAT_VERSION,
        "ambient_dim": int(F.ambient_dim),
        "vectors": vectors,
        "index_points": F.index_points.tolist(),
        "geometry_ref": None if F.geometry is None else F.geometry.to_dict(),
        "labels": None if F.labels is None else list(F.labels),
        "meta": meta,
    }


def frame_from_dict(d):
    if d.get("version") != FORMAT_VERSION:
        raise InvalidInput(f"unsupported frame file version {d.get('version')!r}")
    raw = np.asarray(d["vectors"], dtype=float)
    if raw.ndim != 3 or raw.shape[2] != 2:
        raise InvalidInput("vectors must be a list of [[re, im], ...] rows")
    V = raw[..., 0] + 1j * raw[..., 1]
    if V.shape[1] != d["ambient_dim"]:
        raise InvalidInput("ambient_dim does not match the vectors")
    geo = None if d.get("geometry_ref") is None else PointGeometry.from_dict(d["geometry_ref"])
    return FrameSystem(V, d["index_points"], geo, d.get("labels"), d.get("meta"))


def save_frame(F, path):
    Path(path).write_text(dumps(frame_to_dict(F)))


def load_frame(path):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read frame file {path}: {exc}") from exc
    return frame_from_dict(data)


def points_to_dict(points, geometry):
    return {"geometry": geometry.to_dict(), "points": np.asarray(points).tolist()}


def points_from_dict(d):
    return np.asarray(d["points"], dtype=float), PointGeometry.from_dict(d["geometry"])


def plot_rows(report):
    """Tidy rows (one per window or per pass) for any report type."""
    if isinstance(report, (DensityReport, MeasureReport)):
        return report.rows()
    if isinstance(report, ThinningTrace):
        return report.summary_rows()
    if isinstance(report, list):
        return [dict(row) for row in report]
    if isinstance(report, dict):
        return [{k: v for k, v in report.items() if not isinstance(v, (dict, list))}]
    raise InvalidInput(f"no plot rows for {type(report).__name__}")


def csv_text(rows):
    buf = _io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def emit_plotdata(report, path):
    """Write ``report`` as a tidy CSV file and return the number of rows."""
    rows = plot_rows(report)
    Path(path).write_text(csv_text(rows))
    return len(rows)
