"""Figures for a finished run directory.

Reads only the files a run wrote (trace.json, metrics.csv), so reports can
be re-rendered long after the run, or for runs made elsewhere.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ScenarioError  # noqa: E402


def _load_trace(run_dir: Path) -> dict:
    path = run_dir / "trace.json"
    if not path.exists():
        raise ScenarioError(f"{run_dir} has no trace.json; was this "
                            "directory written by 'partmap run'?")
    return json.loads(path.read_text(encoding="utf-8"))


def _load_metrics(run_dir: Path) -> list[dict]:
    path = run_dir / "metrics.csv"
    if not path.exists():
        raise ScenarioError(f"{run_dir} has no metrics.csv")
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def render_run(run_dir: str | Path) -> list[Path]:
    """Write map.png, accuracy.png, and errors.png into the run directory."""
    run_dir = Path(run_dir)
    trace = _load_trace(run_dir)
    rows = _load_metrics(run_dir)
    written = [
        _render_map(run_dir, trace),
        _render_accuracy(run_dir, rows),
        _render_errors(run_dir, rows),
    ]
    return written


def _render_map(run_dir: Path, trace: dict) -> Path:
    world = trace["world"]
    steps = trace["steps"]
    fig, ax = plt.subplots(figsize=(6.0, 6.0), dpi=120)
    ax.add_patch(plt.Rectangle((0, 0), world["width"], world["height"],
                               fill=False, linewidth=1.2, color="0.3"))
    xs = [s["x"] for s in steps]
    ys = [s["y"] for s in steps]
    if xs:
        ax.plot(xs, ys, linewidth=0.8, color="tab:blue", alpha=0.7,
                label="walk")
    attends = [s for s in steps if s["action"] == "ATTEND"]
    if attends:
        ax.scatter([s["x"] for s in attends], [s["y"] for s in attends],
                   s=12, color="tab:blue", zorder=3, label="attend pose")
    for part in world["parts"]:
        px, py = part["position"]
        ax.scatter([px], [py], marker="x", s=60, color="tab:red", zorder=4)
        ax.annotate(str(part["id"]), (px, py), textcoords="offset points",
                    xytext=(5, 5), fontsize=9)
    sx, sy = world["agent_start"]
    ax.scatter([sx], [sy], marker="o", s=50, facecolor="none",
               edgecolor="tab:green", linewidth=1.5, zorder=4, label="start")
    ax.set_xlim(-0.5, world["width"] + 0.5)
    ax.set_ylim(-0.5, world["height"] + 0.5)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"{world['environment']}: walk and parts")
    ax.legend(loc="upper right", fontsize=8)
    out = run_dir / "map.png"
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def _render_accuracy(run_dir: Path, rows: list[dict]) -> Path:
    steps, outcomes, cand_steps, cand_counts = [], [], [], []
    for row in rows:
        if row["prediction_correct"] != "":
            steps.append(int(row["step"]))
            outcomes.append(int(row["prediction_correct"]))
        if row["candidate_count"] != "":
            cand_steps.append(int(row["step"]))
            cand_counts.append(int(row["candidate_count"]))
    fig, ax = plt.subplots(figsize=(6.5, 4.2), dpi=120)
    if steps:
        running = []
        hits = 0
        for i, ok in enumerate(outcomes, start=1):
            hits += ok
            running.append(hits / i)
        ax.plot(steps, running, color="tab:blue", linewidth=1.4,
                label="running accuracy")
        ax.scatter(steps, outcomes, s=8, color="0.5", alpha=0.5,
                   label="hit / miss")
        ax.set_ylim(-0.05, 1.05)
    else:
        ax.text(0.5, 0.5, "no predictions in this run", ha="center",
                va="center", transform=ax.transAxes)
    ax.set_xlabel("step")
    ax.set_ylabel("shift prediction accuracy")
    if cand_steps:
        twin = ax.twinx()
        twin.plot(cand_steps, cand_counts, color="tab:orange", linewidth=0.8,
                  alpha=0.6)
        twin.set_ylabel("candidates in range", color="tab:orange")
        twin.tick_params(axis="y", colors="tab:orange")
    ax.set_title("attention shift predictions")
    if steps:
        ax.legend(loc="lower left", fontsize=8)
    out = run_dir / "accuracy.png"
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def _render_errors(run_dir: Path, rows: list[dict]) -> Path:
    steps = [int(r["step"]) for r in rows]
    phase = [float(r["phase_error"]) if r["phase_error"] != "" else None
             for r in rows]
    ovc = [(int(r["step"]), float(r["ovc_error_m"])) for r in rows
           if r["ovc_error_m"] != ""]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.5, 5.4), dpi=120,
                                      sharex=True)
    ps = [(s, e) for s, e in zip(steps, phase) if e is not None]
    if ps:
        floor = 1e-18  # keep exact zeros visible on the log axis
        top.semilogy([s for s, _ in ps], [max(e, floor) for _, e in ps],
                     linewidth=0.9, color="tab:purple")
    top.set_ylabel("phase drift [m]")
    top.set_title("tracking error")
    if ovc:
        bottom.plot([s for s, _ in ovc], [e for _, e in ovc], linewidth=0.9,
                    color="tab:red")
    bottom.set_ylabel("part vector decode error [m]")
    bottom.set_xlabel("step")
    out = run_dir / "errors.png"
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out
