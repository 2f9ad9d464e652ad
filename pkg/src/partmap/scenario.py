"""Scenario files: a seeded world, an action script, optional assertions.

A scenario is one JSON object:

    {
      "seed": 7,
      "config": {"strategy": "WITH_REVERSE", "ovc": {"n_ring": 10}},
      "world": {"generate": {"n_parts": 8}, "name": "room-a"},
      "actions": [{"kind": "TOUR", "tour": "learning"},
                  {"kind": "TOUR", "tour": "reverse"}],
      "assertions": {"min_prediction_accuracy": 0.95}
    }

``world`` either generates a room from the seed or lists parts inline (then
``width``, ``height``, and ``agent`` are required). Actions are applied in
order; TOUR entries expand into walk scripts before the run starts, using a
dedicated RNG stream so reruns expand identically. Validation is strict:
unknown keys anywhere are an error, reported with their path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .codes import Vec, rotate, vec_add, wrap_angle
from .config import EngineConfig, config_from_dict, seed_stream
from .engine import Engine, StepResult
from .errors import ScenarioError
from .metrics import (render_metrics_csv, summarize, write_json_atomic,
                      write_text_atomic)
from .world import (Part, Pose, World, generate_world, learning_order,
                    random_tour_order, random_walk_actions,
                    sample_descriptors, start_pose, tour_actions)

_TOP_KEYS = {"seed", "config", "world", "actions", "assertions"}
_TOUR_KINDS = {"learning", "reverse", "random_tour", "random_walk"}


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _require_keys(obj: dict, allowed: set[str], required: set[str],
                  where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ScenarioError(f"{where}: missing keys {sorted(missing)}")


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    config: EngineConfig
    world_spec: dict
    actions_spec: list[dict]
    assertions: dict


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path.name} is not valid JSON: {exc}") from exc
    return scenario_from_dict(raw, name=path.stem)


def scenario_from_dict(raw: dict, name: str) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    _require_keys(raw, _TOP_KEYS, {"seed", "world", "actions"}, "scenario")
    if not _is_int(raw["seed"]) or raw["seed"] < 0:
        raise ScenarioError("seed must be a non-negative integer")
    config = config_from_dict(raw.get("config", {}))
    world_spec = _validate_world(raw["world"])
    n_parts = (len(world_spec["parts"]) if "parts" in world_spec
               else world_spec["generate"].get("n_parts", 8))
    actions = _validate_actions(raw["actions"], n_parts)
    assertions = _validate_assertions(raw.get("assertions", {}))
    return Scenario(name, raw["seed"], config, world_spec, actions, assertions)


def _validate_world(spec) -> dict:
    if not isinstance(spec, dict):
        raise ScenarioError("world must be an object")
    if ("generate" in spec) == ("parts" in spec):
        raise ScenarioError("world needs exactly one of 'generate' or 'parts'")
    if "generate" in spec:
        _require_keys(spec, {"generate", "agent", "name"}, {"generate"},
                      "world")
        gen = spec["generate"]
        if not isinstance(gen, dict):
            raise ScenarioError("world.generate must be an object")
        allowed = {"n_parts", "width", "height", "min_sep", "margin",
                   "max_link", "agent_clearance"}
        _require_keys(gen, allowed, set(), "world.generate")
        for key, value in gen.items():
            if key == "n_parts":
                if not _is_int(value) or value < 1:
                    raise ScenarioError("world.generate.n_parts must be a "
                                        "positive integer")
            elif value is not None and (not _is_num(value) or value < 0):
                raise ScenarioError(f"world.generate.{key} must be a "
                                    "non-negative number")
    else:
        _require_keys(spec, {"parts", "agent", "name", "width", "height"},
                      {"parts", "agent", "width", "height"}, "world")
        parts = spec["parts"]
        if not isinstance(parts, list) or not parts:
            raise ScenarioError("world.parts must be a non-empty list")
        for i, item in enumerate(parts):
            where = f"world.parts[{i}]"
            if not isinstance(item, dict):
                raise ScenarioError(f"{where} must be an object")
            _require_keys(item, {"id", "position"}, {"id", "position"}, where)
            if item["id"] != i:
                raise ScenarioError(f"{where}.id must be {i} (ids are 0..n-1 "
                                    "in order)")
            _validate_point(item["position"], f"{where}.position")
        for key in ("width", "height"):
            if not _is_num(spec[key]) or spec[key] <= 0:
                raise ScenarioError(f"world.{key} must be a positive number")
    if "agent" in spec:
        agent = spec["agent"]
        if not isinstance(agent, dict):
            raise ScenarioError("world.agent must be an object")
        _require_keys(agent, {"position", "heading"}, {"position"},
                      "world.agent")
        _validate_point(agent["position"], "world.agent.position")
        if "heading" in agent and not _is_num(agent["heading"]):
            raise ScenarioError("world.agent.heading must be a number")
    if "name" in spec and not isinstance(spec["name"], str):
        raise ScenarioError("world.name must be a string")
    return spec


def _validate_point(value, where: str) -> None:
    if (not isinstance(value, list) or len(value) != 2
            or not all(_is_num(c) for c in value)):
        raise ScenarioError(f"{where} must be [x, y]")


def _validate_actions(actions, n_parts: int) -> list[dict]:
    if not isinstance(actions, list) or not actions:
        raise ScenarioError("actions must be a non-empty list")
    for i, item in enumerate(actions):
        where = f"actions[{i}]"
        if not isinstance(item, dict) or "kind" not in item:
            raise ScenarioError(f"{where} must be an object with a 'kind'")
        kind = item["kind"]
        if kind == "MOVE":
            _require_keys(item, {"kind", "distance"}, {"distance"}, where)
            if not _is_num(item["distance"]):
                raise ScenarioError(f"{where}.distance must be a number")
        elif kind == "TURN":
            _require_keys(item, {"kind", "angle"}, {"angle"}, where)
            if not _is_num(item["angle"]):
                raise ScenarioError(f"{where}.angle must be a number")
        elif kind == "ATTEND":
            _require_keys(item, {"kind", "part"}, {"part"}, where)
            if not _is_int(item["part"]) or not 0 <= item["part"] < n_parts:
                raise ScenarioError(f"{where}.part must be an integer in "
                                    f"[0, {n_parts})")
        elif kind == "CONSOLIDATE":
            _require_keys(item, {"kind", "hops"}, {"hops"}, where)
            if not _is_int(item["hops"]) or item["hops"] < 1:
                raise ScenarioError(f"{where}.hops must be an integer >= 1")
        elif kind == "TOUR":
            _validate_tour(item, n_parts, where)
        else:
            raise ScenarioError(f"{where}.kind must be one of MOVE, TURN, "
                                "ATTEND, CONSOLIDATE, TOUR")
    return actions


def _validate_tour(item: dict, n_parts: int, where: str) -> None:
    tour = item.get("tour")
    if tour not in _TOUR_KINDS:
        raise ScenarioError(f"{where}.tour must be one of "
                            f"{sorted(_TOUR_KINDS)}")
    common = {"kind", "tour", "approach", "max_step"}
    if tour in ("learning", "reverse"):
        _require_keys(item, common, set(), where)
    elif tour == "random_tour":
        _require_keys(item, common | {"attends"}, {"attends"}, where)
        if not _is_int(item["attends"]) or item["attends"] < 1:
            raise ScenarioError(f"{where}.attends must be an integer >= 1")
    else:  # random_walk
        _require_keys(item, {"kind", "tour", "part", "steps", "band",
                             "max_step", "margin"}, {"part", "steps"}, where)
        if not _is_int(item["part"]) or not 0 <= item["part"] < n_parts:
            raise ScenarioError(f"{where}.part must be an integer in "
                                f"[0, {n_parts})")
        if not _is_int(item["steps"]) or item["steps"] < 1:
            raise ScenarioError(f"{where}.steps must be an integer >= 1")
        if "band" in item:
            band = item["band"]
            if (not isinstance(band, list) or len(band) != 2
                    or not all(_is_num(b) for b in band)
                    or not 0 < band[0] < band[1]):
                raise ScenarioError(f"{where}.band must be [lo, hi] with "
                                    "0 < lo < hi")
    for key in ("approach", "max_step", "margin"):
        if key in item and (not _is_num(item[key]) or item[key] <= 0):
            raise ScenarioError(f"{where}.{key} must be a positive number")


_ASSERTION_RULES = {
    "min_prediction_accuracy": ("prediction_accuracy", "ge"),
    "min_prediction_count": ("prediction_count", "ge"),
    "max_phase_error": ("max_phase_error", "le"),
    "node_count": ("node_count", "eq"),
    "max_edge_count": ("edge_count", "le"),
    "max_relocations": ("relocations", "le"),
    "max_fallbacks": ("fallbacks", "le"),
    "min_mean_candidate_count": ("mean_candidate_count", "ge"),
    "max_mean_ovc_error_m": ("mean_ovc_error_m", "le"),
}


def _validate_assertions(spec) -> dict:
    if not isinstance(spec, dict):
        raise ScenarioError("assertions must be an object")
    _require_keys(spec, set(_ASSERTION_RULES), set(), "assertions")
    for key, value in spec.items():
        if not _is_num(value):
            raise ScenarioError(f"assertions.{key} must be a number")
    return spec


def evaluate_assertions(assertions: dict, summary: dict
                        ) -> tuple[list[dict], bool]:
    checks = []
    for key in sorted(assertions):
        metric, op = _ASSERTION_RULES[key]
        expected = assertions[key]
        actual = summary.get(metric)
        if actual is None:
            passed = False
        elif op == "ge":
            passed = actual >= expected
        elif op == "le":
            passed = actual <= expected
        else:
            passed = actual == expected
        checks.append({"name": key, "expected": expected,
                       "actual": actual, "passed": passed})
    return checks, all(c["passed"] for c in checks)


# -- building and running ----------------------------------------------------

def build_world(scenario: Scenario) -> World:
    spec = scenario.world_spec
    rng = seed_stream(scenario.seed, "world")
    name = spec.get("name", "room-0")
    descriptor = scenario.config.descriptor
    if "generate" in spec:
        world = generate_world(rng, environment=name,
                               descriptor_dim=descriptor.dim,
                               descriptor_bits=descriptor.bits,
                               similarity_cap=descriptor.similarity_threshold,
                               **spec["generate"])
    else:
        descriptors = sample_descriptors(rng, len(spec["parts"]),
                                         descriptor.dim, descriptor.bits,
                                         descriptor.similarity_threshold)
        parts = tuple(Part(item["id"], tuple(item["position"]), d)
                      for item, d in zip(spec["parts"], descriptors))
        world = World(name, spec["width"], spec["height"], parts,
                      (0.0, 0.0), 0.0)
        for part in parts:
            if not world.contains(part.position):
                raise ScenarioError(f"part {part.id} lies outside the room")
    if "agent" in spec:
        agent = spec["agent"]
        world = replace(world, agent_start=tuple(agent["position"]),
                        agent_heading=float(agent.get("heading", 0.0)))
    if not world.contains(world.agent_start):
        raise ScenarioError("agent start lies outside the room")
    return world


def expand_actions(scenario: Scenario, world: World) -> list[dict]:
    """Resolve TOUR entries into concrete walk scripts.

    A pose mirror tracks the agent through literal MOVE/TURN entries with
    the engine's own arithmetic, so tours start from the exact pose the
    engine will have reached by then.
    """
    pose = start_pose(world)
    rng = seed_stream(scenario.seed, "tour")
    out: list[dict] = []
    for item in scenario.actions_spec:
        kind = item["kind"]
        if kind == "MOVE":
            out.append(item)
            pose.position = vec_add(
                pose.position, rotate((item["distance"], 0.0), pose.heading))
        elif kind == "TURN":
            out.append(item)
            pose.heading = wrap_angle(pose.heading + item["angle"])
        elif kind in ("ATTEND", "CONSOLIDATE"):
            out.append(item)
        else:
            out.extend(_expand_tour(item, world, pose, rng))
    return out


def _expand_tour(item: dict, world: World, pose: Pose, rng) -> list[dict]:
    tour = item["tour"]
    approach = item.get("approach", 1.0)
    max_step = item.get("max_step", 0.5)
    if tour == "learning":
        order = learning_order(world)
    elif tour == "reverse":
        order = list(reversed(learning_order(world)))
    elif tour == "random_tour":
        order = random_tour_order(rng, len(world.parts), item["attends"])
    else:
        return random_walk_actions(
            world, rng, pose, item["steps"], item["part"],
            band=tuple(item.get("band", (0.8, 6.8))),
            max_step=max_step, margin=item.get("margin", 0.2))
    return tour_actions(world, order, pose, approach, max_step)


def apply_action(engine: Engine, action: dict) -> StepResult:
    kind = action["kind"]
    if kind == "MOVE":
        return engine.move(action["distance"])
    if kind == "TURN":
        return engine.turn(action["angle"])
    if kind == "ATTEND":
        return engine.attend(action["part"])
    return engine.consolidate(action["hops"])


@dataclass
class RunOutcome:
    scenario: Scenario
    engine: Engine
    results: list[StepResult]
    summary: dict
    checks: list[dict]
    passed: bool
    out_dir: Path | None


def run_scenario(scenario: Scenario, out_dir: str | Path | None = None,
                 figures: bool = False) -> RunOutcome:
    world = build_world(scenario)
    engine = Engine(world, scenario.config, seed=scenario.seed)
    actions = expand_actions(scenario, world)
    results: list[StepResult] = []
    trace_steps: list[dict] = []
    for action in actions:
        result = apply_action(engine, action)
        results.append(result)
        trace_steps.append({
            "step": result.step,
            "action": result.action,
            "x": engine.position[0],
            "y": engine.position[1],
            "heading": engine.heading.angle,
            "active_part": engine.active_part,
        })
    summary = summarize(results, engine)
    checks, passed = evaluate_assertions(scenario.assertions, summary)
    outcome = RunOutcome(scenario, engine, results, summary, checks, passed,
                         Path(out_dir) if out_dir is not None else None)
    if outcome.out_dir is not None:
        _write_outputs(outcome, world, trace_steps)
        if figures:
            from .plots import render_run
            render_run(outcome.out_dir)
    return outcome


def _write_outputs(outcome: RunOutcome, world: World,
                   trace_steps: list[dict]) -> None:
    from datetime import datetime, timezone

    from . import __version__

    out = outcome.out_dir
    write_text_atomic(out / "metrics.csv", render_metrics_csv(outcome.results))
    write_json_atomic(out / "summary.json", {
        "schema_version": 1,
        "summary": outcome.summary,
        "assertions": {"passed": outcome.passed, "checks": outcome.checks},
        "metadata": {
            # sole timestamp in any output; everything else is reproducible
            "created_utc": datetime.now(timezone.utc).isoformat(
                timespec="seconds"),
            "seed": outcome.scenario.seed,
            "scenario": outcome.scenario.name,
            "tool_version": __version__,
        },
    })
    write_text_atomic(out / "graph.json", outcome.engine.graph.to_json())
    write_text_atomic(out / "graph.dot", outcome.engine.graph.to_dot())
    write_json_atomic(out / "trace.json", {
        "schema_version": 1,
        "world": {
            "environment": world.environment,
            "width": world.width,
            "height": world.height,
            "parts": [{"id": p.id, "position": list(p.position)}
                      for p in world.parts],
            "agent_start": list(world.agent_start),
            "agent_heading": world.agent_heading,
        },
        "steps": trace_steps,
    })
