"""End-to-end checks of the command line interface."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from partmap.cli import main

REPO = Path(__file__).resolve().parent.parent
QUICKSTART = REPO / "scenarios" / "quickstart.json"


@pytest.fixture
def runner():
    return CliRunner()


def write_scenario(path: Path, raw: dict) -> Path:
    path.write_text(json.dumps(raw, indent=2), encoding="utf-8")
    return path


def demo_raw() -> dict:
    return {
        "seed": 7,
        "world": {
            "name": "cli-room",
            "width": 10,
            "height": 10,
            "parts": [
                {"id": 0, "position": [3.0, 5.0]},
                {"id": 1, "position": [5.0, 7.0]},
                {"id": 2, "position": [7.0, 4.0]},
            ],
            "agent": {"position": [5.0, 5.0], "heading": 0.0},
        },
        "actions": [
            {"kind": "TOUR", "tour": "learning"},
            {"kind": "TOUR", "tour": "reverse"},
        ],
        "assertions": {"node_count": 3, "min_prediction_accuracy": 0.99},
    }


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "partmap" in result.output


def test_run_quickstart(runner, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(main, ["run", str(QUICKSTART), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "[PASS]" in result.output
    assert "[FAIL]" not in result.output
    for name in ("metrics.csv", "summary.json", "graph.json", "graph.dot",
                 "trace.json"):
        assert (out / name).is_file(), name


def test_run_default_out_dir(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        result = runner.invoke(main, ["run", str(QUICKSTART)])
        assert result.exit_code == 0, result.output
        assert Path("runs/quickstart/metrics.csv").is_file()


def test_run_seed_override_changes_run(runner, tmp_path):
    scenario = write_scenario(tmp_path / "demo.json", demo_raw())
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert runner.invoke(main, ["run", str(scenario), "--out", str(out_a),
                                "--seed", "3"]).exit_code == 0
    assert runner.invoke(main, ["run", str(scenario), "--out", str(out_b),
                                "--seed", "4"]).exit_code == 0
    # descriptors are seeded, so the stored maps must differ
    assert (out_a / "graph.json").read_text() != \
        (out_b / "graph.json").read_text()


def test_run_negative_seed(runner, tmp_path):
    scenario = write_scenario(tmp_path / "demo.json", demo_raw())
    result = runner.invoke(main, ["run", str(scenario), "--seed", "-4"])
    assert result.exit_code == 2
    assert "error" in result.stderr


def test_run_invalid_json(runner, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{oops", encoding="utf-8")
    result = runner.invoke(main, ["run", str(broken)])
    assert result.exit_code == 2


def test_run_missing_file(runner, tmp_path):
    result = runner.invoke(main, ["run", str(tmp_path / "absent.json")])
    assert result.exit_code == 2  # click's own path check


def test_run_failing_assertions(runner, tmp_path):
    raw = demo_raw()
    raw["assertions"] = {"node_count": 99}
    scenario = write_scenario(tmp_path / "red.json", raw)
    result = runner.invoke(main, ["run", str(scenario), "--out",
                                  str(tmp_path / "red")])
    assert result.exit_code == 1
    assert "[FAIL] node_count" in result.output
    # outputs still land on disk for inspection
    assert (tmp_path / "red" / "summary.json").is_file()


def test_run_model_error(runner, tmp_path):
    raw = demo_raw()
    raw["world"] = {
        "name": "far-room",
        "width": 20,
        "height": 20,
        "parts": [{"id": 0, "position": [1.0, 1.0]},
                  {"id": 1, "position": [18.0, 18.0]}],
        "agent": {"position": [1.5, 1.0]},
    }
    raw["actions"] = [{"kind": "ATTEND", "part": 1}]
    del raw["assertions"]
    scenario = write_scenario(tmp_path / "far.json", raw)
    result = runner.invoke(main, ["run", str(scenario)])
    assert result.exit_code == 3
    assert "error" in result.stderr


def test_run_figures_flag(runner, tmp_path):
    scenario = write_scenario(tmp_path / "demo.json", demo_raw())
    out = tmp_path / "fig"
    result = runner.invoke(main, ["run", str(scenario), "--out", str(out),
                                  "--figures"])
    assert result.exit_code == 0, result.output
    for name in ("map.png", "accuracy.png", "errors.png"):
        assert (out / name).stat().st_size > 0, name


def test_sweep_over_seeds(runner, tmp_path):
    scenario = write_scenario(tmp_path / "demo.json", demo_raw())
    out = tmp_path / "sweep"
    result = runner.invoke(main, ["sweep", str(scenario), "--grid",
                                  "seed=1,2", "--out", str(out)])
    assert result.exit_code == 0, result.output
    table = (out / "sweep_summary.csv").read_text().splitlines()
    assert table[0].startswith("seed,status,passed,")
    assert len(table) == 3
    for slug in ("seed=1", "seed=2"):
        assert (out / slug / "summary.json").is_file()


def test_sweep_parallel_matches_serial(runner, tmp_path):
    scenario = write_scenario(tmp_path / "demo.json", demo_raw())
    serial, parallel = tmp_path / "s1", tmp_path / "s2"
    grid = "seed=1,2;config.strategy=WITH_REVERSE,DISABLED"
    assert runner.invoke(main, ["sweep", str(scenario), "--grid", grid,
                                "--out", str(serial)]).exit_code == 0
    assert runner.invoke(main, ["sweep", str(scenario), "--grid", grid,
                                "--out", str(parallel), "--jobs", "2"
                                ]).exit_code == 0
    assert (serial / "sweep_summary.csv").read_bytes() == \
        (parallel / "sweep_summary.csv").read_bytes()


def test_sweep_broken_combo(runner, tmp_path):
    scenario = write_scenario(tmp_path / "demo.json", demo_raw())
    result = runner.invoke(main, ["sweep", str(scenario), "--grid",
                                  "world.parts=5", "--out",
                                  str(tmp_path / "broken")])
    assert result.exit_code == 1
    assert "scenario-error" in result.output


def test_sweep_bad_grid(runner, tmp_path):
    scenario = write_scenario(tmp_path / "demo.json", demo_raw())
    result = runner.invoke(main, ["sweep", str(scenario), "--grid", "nopath",
                                  "--out", str(tmp_path / "bad")])
    assert result.exit_code == 2


def test_export_stdout_and_file(runner, tmp_path):
    scenario = write_scenario(tmp_path / "demo.json", demo_raw())
    out = tmp_path / "run"
    assert runner.invoke(main, ["run", str(scenario), "--out",
                                str(out)]).exit_code == 0
    result = runner.invoke(main, ["export", str(out / "graph.json")])
    assert result.exit_code == 0
    assert result.output.startswith("digraph")
    dot_path = tmp_path / "map.dot"
    result = runner.invoke(main, ["export", str(out / "graph.json"), "--out",
                                  str(dot_path)])
    assert result.exit_code == 0
    assert dot_path.read_text() == (out / "graph.dot").read_text()


def test_export_rejects_non_graph(runner, tmp_path):
    bogus = tmp_path / "bogus.json"
    bogus.write_text('{"nodes": "nope"}', encoding="utf-8")
    result = runner.invoke(main, ["export", str(bogus)])
    assert result.exit_code == 2


def test_report_renders_figures(runner, tmp_path):
    scenario = write_scenario(tmp_path / "demo.json", demo_raw())
    out = tmp_path / "run"
    assert runner.invoke(main, ["run", str(scenario), "--out",
                                str(out)]).exit_code == 0
    result = runner.invoke(main, ["report", str(out)])
    assert result.exit_code == 0, result.output
    for name in ("map.png", "accuracy.png", "errors.png"):
        assert (out / name).stat().st_size > 0, name


def test_report_requires_run_outputs(runner, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    result = runner.invoke(main, ["report", str(empty)])
    assert result.exit_code == 2
