"""Report serialization: versioned JSON plus plot-ready CSV side files.

Every file is written to a temporary sibling and renamed into place, so a
reader never sees a partially written output.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConfigError, IoFailure
from .inference import InferenceResult
from .montecarlo import BerryEsseenCurve, McReport, VarianceCurve

SCHEMA_VERSION = 1

FORMATS = ("json", "csv_stats", "csv_quantiles", "csv_hist", "csv_curve")

_KINDS = {
    McReport: "mc_report",
    InferenceResult: "inference_result",
    BerryEsseenCurve: "berry_esseen_curve",
    VarianceCurve: "variance_curve",
}
_BY_KIND = {v: k for k, v in _KINDS.items()}

_SUFFIX = {
    "csv_stats": "_stats.csv",
    "csv_quantiles": "_quantiles.csv",
    "csv_hist": "_hist.csv",
    "csv_curve": "_curve.csv",
    "csv_panel": "_panel.csv",
}


def atomic_write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def side_path(path: str | Path, fmt: str) -> Path:
    path = Path(path)
    if fmt == "json":
        return path
    return path.with_name(path.stem + _SUFFIX[fmt])


def _csv(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def histogram_rows(stats, bins: int = 50) -> list[tuple[float, float, int, float]]:
    counts, edges = np.histogram(np.asarray(stats), bins=bins)
    width = np.diff(edges)
    density = counts / (counts.sum() * width)
    return [
        (float(edges[k]), float(edges[k + 1]), int(counts[k]), float(density[k]))
        for k in range(len(counts))
    ]


def report_kind(report) -> str:
    for cls, kind in _KINDS.items():
        if isinstance(report, cls):
            return kind
    if isinstance(report, dict):
        return "summary"
    raise ConfigError(f"cannot serialize {type(report).__name__}")


def to_json(report, run_config: dict | None = None) -> str:
    payload = report.to_dict() if hasattr(report, "to_dict") else dict(report)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": report_kind(report),
        "run_config": run_config,
        "result": payload,
    }
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def from_json(text: str):
    """Inverse of :func:`to_json`; returns the report object (or dict for summaries)."""
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {doc.get('schema_version')!r}")
    cls = _BY_KIND.get(doc["kind"])
    return cls.from_dict(doc["result"]) if cls else doc["result"]


def load_report(path: str | Path):
    try:
        return from_json(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _render(report, fmt: str, run_config: dict | None) -> str:
    if fmt == "json":
        return to_json(report, run_config)
    if fmt == "csv_stats":
        if not isinstance(report, McReport):
            raise ConfigError("csv_stats needs a Monte Carlo report")
        return _csv(["scaled_stat"], ([s] for s in report.scaled_stats))
    if fmt == "csv_quantiles":
        if not isinstance(report, McReport):
            raise ConfigError("csv_quantiles needs a Monte Carlo report")
        rows = ((p, e, l) for p, (e, l) in zip(report.probabilities, report.quantile_pairs))
        return _csv(["prob", "empirical", "limit"], rows)
    if fmt == "csv_hist":
        if not isinstance(report, McReport):
            raise ConfigError("csv_hist needs a Monte Carlo report")
        return _csv(
            ["bin_left", "bin_right", "count", "density"],
            histogram_rows(report.scaled_stats),
        )
    if fmt == "csv_curve":
        if isinstance(report, BerryEsseenCurve):
            return _csv(["n", "ks"], report.points)
        if isinstance(report, VarianceCurve):
            return _csv(["t", "empirical_var", "limit_var"], report.points)
        raise ConfigError("csv_curve needs a Berry-Esseen or variance curve")
    raise ConfigError(f"unknown output format {fmt!r}")


def emit_report(
    report, formats: Iterable[str], path: str | Path, run_config: dict | None = None
) -> list[Path]:
    """Write ``report`` in each requested format; returns the paths written.

    ``path`` names the JSON file; CSV outputs sit beside it with suffixes
    such as ``_stats.csv``. All contents are rendered before anything is
    written, so a format error leaves no files behind.
    """
    formats = list(dict.fromkeys(formats))
    unknown = [f for f in formats if f not in FORMATS]
    if unknown:
        raise ConfigError(f"unknown output formats {unknown}; choose from {FORMATS}")
    rendered = [(side_path(path, f), _render(report, f, run_config)) for f in formats]
    return [atomic_write_text(p, text) for p, text in rendered]
