"""Grid sweeps: run one scenario under a cartesian product of overrides.

The grid is a compact string, semicolon-separated assignments with
comma-separated values:

    config.ovc.n_ring=8,10;config.strategy=WITH_REVERSE,DISABLED;seed=1,2

Each assignment path points into the scenario JSON (dotted keys, created if
absent). Every combination gets its own output directory named after the
overrides, and one summary table collects the headline numbers.
"""

from __future__ import annotations

import copy
import csv
import io
import itertools
import json
import re
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import PartmapError, ScenarioError
from .metrics import format_float, write_text_atomic
from .scenario import run_scenario, scenario_from_dict

_SUMMARY_FIELDS = [
    "status", "passed", "steps", "node_count", "edge_count",
    "prediction_count", "prediction_accuracy", "mean_candidate_count",
    "max_phase_error", "mean_ovc_error_m", "fallbacks", "relocations",
    "consolidated_edges",
]


def parse_grid(grid: str) -> list[tuple[str, list]]:
    """Parse the grid string into (path, values) pairs, order preserved."""
    axes: list[tuple[str, list]] = []
    seen: set[str] = set()
    for chunk in grid.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise ScenarioError(f"grid axis '{chunk}' has no '='")
        path, _, tail = chunk.partition("=")
        path = path.strip()
        if not path or not re.fullmatch(r"[A-Za-z0-9_.]+", path):
            raise ScenarioError(f"bad grid path '{path}'")
        if path in seen:
            raise ScenarioError(f"grid path '{path}' repeated")
        seen.add(path)
        values = [_parse_value(v.strip()) for v in tail.split(",")]
        if not values or any(v == "" for v in values):
            raise ScenarioError(f"grid axis '{path}' has an empty value")
        axes.append((path, values))
    if not axes:
        raise ScenarioError("grid is empty")
    return axes


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text  # bare strings (enum names) pass through


def apply_override(raw: dict, path: str, value) -> None:
    keys = path.split(".")
    node = raw
    for key in keys[:-1]:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ScenarioError(f"override path '{path}' crosses the "
                                f"non-object key '{key}'")
        node = child
    node[keys[-1]] = value


def combo_slug(overrides: dict) -> str:
    parts = [f"{path.split('.')[-1]}={value}" for path, value in
             overrides.items()]
    slug = "__".join(parts)
    return re.sub(r"[^A-Za-z0-9_.=+-]", "-", slug)


def _run_combo(args: tuple[str, dict, str]) -> dict:
    scenario_path, overrides, out_dir = args
    raw = json.loads(Path(scenario_path).read_text(encoding="utf-8"))
    for path, value in overrides.items():
        apply_override(raw, path, value)
    row = dict(overrides)
    try:
        scenario = scenario_from_dict(raw, name=Path(scenario_path).stem)
        outcome = run_scenario(scenario, out_dir)
    except ScenarioError as exc:
        row.update({"status": f"scenario-error: {exc}", "passed": False})
        return row
    except PartmapError as exc:
        row.update({"status": f"model-error: {exc}", "passed": False})
        return row
    row["status"] = "ok"
    row["passed"] = outcome.passed
    row.update(outcome.summary)
    return row


def run_sweep(scenario_path: str | Path, grid: str, out_dir: str | Path,
              jobs: int = 1) -> list[dict]:
    """Run the full product of grid values; returns one row per combo."""
    axes = parse_grid(grid)
    out_dir = Path(out_dir)
    combos = [dict(zip([p for p, _ in axes], values))
              for values in itertools.product(*[v for _, v in axes])]
    slugs = [combo_slug(c) for c in combos]
    if len(set(slugs)) != len(slugs):
        # same last path segment on two axes; fall back to full paths
        slugs = [re.sub(r"[^A-Za-z0-9_.=+-]", "-",
                        "__".join(f"{p}={v}" for p, v in c.items()))
                 for c in combos]
    tasks = [(str(scenario_path), combo, str(out_dir / slug))
             for combo, slug in zip(combos, slugs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_combo, tasks))
    else:
        rows = [_run_combo(task) for task in tasks]
    write_text_atomic(out_dir / "sweep_summary.csv",
                      render_sweep_csv(axes, rows))
    return rows


def render_sweep_csv(axes: list[tuple[str, list]], rows: list[dict]) -> str:
    columns = [path for path, _ in axes] + _SUMMARY_FIELDS
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        record = []
        for column in columns:
            value = row.get(column)
            if value is None:
                record.append("")
            elif isinstance(value, bool):
                record.append("1" if value else "0")
            elif isinstance(value, float):
                record.append(format_float(value))
            else:
                record.append(str(value))
        writer.writerow(record)
    return buf.getvalue()
