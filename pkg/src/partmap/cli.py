"""Command line entry points.

Exit codes: 0 success, 1 failed assertions, 2 bad scenario or arguments,
3 model-level error during a run (out-of-range attends and the like).
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import click

from .errors import PartmapError, ScenarioError
from .scenario import load_scenario, run_scenario
from .sweep import run_sweep


@click.group(name="partmap")
@click.version_option(package_name="partmap")
def main() -> None:
    """Learn part maps from scripted walks and query them back."""


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@main.command(name="run")
@click.argument("scenario_path",
                type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(file_okay=False,
                                                  path_type=Path),
              default=None, help="Output directory "
              "[default: runs/<scenario name>]")
@click.option("--seed", type=int, default=None,
              help="Override the scenario seed.")
@click.option("--figures", is_flag=True,
              help="Render PNG figures next to the tables.")
def run_command(scenario_path: Path, out_dir: Path | None, seed: int | None,
                figures: bool) -> None:
    """Run one scenario and write metrics, summary, and graph exports."""
    try:
        scenario = load_scenario(scenario_path)
        if seed is not None:
            if seed < 0:
                raise ScenarioError("seed must be non-negative")
            scenario = replace(scenario, seed=seed)
        out = out_dir if out_dir is not None else Path("runs") / scenario.name
        outcome = run_scenario(scenario, out, figures=figures)
    except ScenarioError as exc:
        _fail(str(exc), 2)
    except PartmapError as exc:
        _fail(str(exc), 3)
    s = outcome.summary
    accuracy = ("-" if s["prediction_accuracy"] is None
                else f"{s['prediction_accuracy']:.4f}")
    click.echo(f"wrote {out}")
    click.echo(f"steps={s['steps']} nodes={s['node_count']} "
               f"edges={s['edge_count']} accuracy={accuracy} "
               f"max_phase_error={s['max_phase_error']:.3g}")
    for check in outcome.checks:
        status = "PASS" if check["passed"] else "FAIL"
        click.echo(f"[{status}] {check['name']}: actual={check['actual']} "
                   f"expected={check['expected']}")
    if not outcome.passed:
        failed = sum(1 for c in outcome.checks if not c["passed"])
        click.echo(f"{failed} assertion(s) failed", err=True)
        sys.exit(1)


@main.command(name="sweep")
@click.argument("scenario_path",
                type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--grid", required=True,
              help="Axes like 'config.ovc.n_ring=8,10;seed=1,2'.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False,
                                                  path_type=Path),
              default=None, help="Output directory "
              "[default: sweeps/<scenario name>]")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Parallel worker processes.")
def sweep_command(scenario_path: Path, grid: str, out_dir: Path | None,
                  jobs: int) -> None:
    """Run a scenario across a parameter grid and tabulate the results."""
    if jobs < 1:
        _fail("--jobs must be >= 1", 2)
    out = (out_dir if out_dir is not None
           else Path("sweeps") / scenario_path.stem)
    try:
        rows = run_sweep(scenario_path, grid, out, jobs=jobs)
    except ScenarioError as exc:
        _fail(str(exc), 2)
    broken = 0
    for row in rows:
        label = ", ".join(f"{k}={v}" for k, v in row.items()
                          if k not in ("status", "passed")
                          and not isinstance(v, (dict, list))
                          and k in _combo_keys(rows))
        click.echo(f"{row['status']:<12} {label}")
        if row["status"] != "ok":
            broken += 1
    click.echo(f"wrote {out / 'sweep_summary.csv'} ({len(rows)} runs)")
    if broken:
        click.echo(f"{broken} run(s) did not complete", err=True)
        sys.exit(1)


def _combo_keys(rows: list[dict]) -> set[str]:
    keys: set[str] = set()
    for row in rows:
        keys.update(k for k in row if "." in k or k == "seed")
    return keys


@main.command(name="export")
@click.argument("graph_path",
                type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["dot"]), default="dot",
              show_default=True, help="Output format.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False,
                                                   path_type=Path),
              default=None, help="Write here instead of stdout.")
def export_command(graph_path: Path, fmt: str, out_path: Path | None) -> None:
    """Convert a stored graph.json into another format."""
    from .config import EngineConfig, build_codes
    from .graph import MemoryGraph

    try:
        text = graph_path.read_text(encoding="utf-8")
        graph = MemoryGraph.from_json(text, build_codes(EngineConfig()).disp)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        _fail(f"cannot load {graph_path}: {exc}", 2)
    rendered = graph.to_dot()
    if out_path is None:
        click.echo(rendered, nl=False)
    else:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(rendered, encoding="utf-8")
        click.echo(f"wrote {out_path}")


@main.command(name="report")
@click.argument("run_dir",
                type=click.Path(exists=True, file_okay=False, path_type=Path))
def report_command(run_dir: Path) -> None:
    """Render figures for an existing run directory."""
    from .plots import render_run

    try:
        written = render_run(run_dir)
    except ScenarioError as exc:
        _fail(str(exc), 2)
    for path in written:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
