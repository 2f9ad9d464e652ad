"""Run outputs: a fixed-schema delimited table plus a JSON summary.

Formatting is pinned down tight because reruns of the same scenario must
produce byte-identical tables: fixed column order, floats at 12 significant
digits, booleans as 1/0, absent values as empty fields. Files are written
to a temp name in the target directory and renamed into place, so a crashed
run never leaves a half-written artifact behind.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

from .engine import Engine, StepResult

CSV_COLUMNS = [
    "step",
    "action",
    "prediction_correct",
    "candidate_count",
    "ambiguity_resolved_by",
    "node_count",
    "edge_count",
    "ovc_error_m",
    "phase_error",
]


def format_float(x: float) -> str:
    return "%.12g" % x


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def metrics_row(r: StepResult) -> list[str]:
    return [
        _cell(r.step),
        _cell(r.action),
        _cell(r.prediction_correct),
        _cell(r.candidate_count),
        _cell(r.resolved_by),
        _cell(r.node_count),
        _cell(r.edge_count),
        _cell(r.ovc_error_m),
        _cell(r.phase_error),
    ]


def render_metrics_csv(results: Iterable[StepResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in results:
        writer.writerow(metrics_row(r))
    return buf.getvalue()


def summarize(results: list[StepResult], engine: Engine) -> dict:
    """Aggregate per-step records into the summary block."""
    predictions = [r for r in results if r.prediction_correct is not None]
    counted = [r.candidate_count for r in results
               if r.candidate_count is not None]
    ovc_errors = [r.ovc_error_m for r in results if r.ovc_error_m is not None]
    return {
        "steps": len(results),
        "node_count": engine.graph.node_count(),
        "edge_count": engine.graph.edge_count(),
        "prediction_count": len(predictions),
        "prediction_accuracy": (
            sum(1 for r in predictions if r.prediction_correct)
            / len(predictions) if predictions else None),
        "mean_candidate_count": (
            sum(counted) / len(counted) if counted else None),
        "max_phase_error": max((r.phase_error for r in results), default=0.0),
        "mean_ovc_error_m": (
            sum(ovc_errors) / len(ovc_errors) if ovc_errors else None),
        "fallbacks": sum(1 for r in results if r.resolved_by == "FALLBACK"),
        "relocations": engine.graph.relocations,
        "consolidated_edges": engine.graph.consolidated_count(),
    }


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.chmod(tmp, 0o644)  # mkstemp defaults to 0600
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path: Path, obj) -> None:
    write_text_atomic(path, json.dumps(obj, indent=2) + "\n")
