"""Acceptance suite: seven end-to-end checks over the whole stack.

Each test prints one [PASS]/[FAIL] line with the measured numbers; run

    pytest tests/test_acceptance.py -v -s

to see them. The checks are deterministic (fixed seeds throughout).
"""

import math
import subprocess
import sys
import time
from pathlib import Path

from partmap import (
    Engine,
    EngineConfig,
    Part,
    RelationStrategy,
    World,
    build_codes,
    chain_positions,
    coarse_chain_positions,
    generate_world,
    learning_order,
    random_tour_order,
    random_walk_actions,
    sample_descriptors,
    seed_stream,
    start_pose,
    tour_actions,
)
from partmap.codes import GridPhase, vec_dist, vec_neg, vec_sub
from partmap.graph import Provenance
from partmap.scenario import apply_action

REPO = Path(__file__).resolve().parent.parent
QUICKSTART = REPO / "scenarios" / "quickstart.json"


def _verdict(tag: str, ok: bool, detail: str) -> bool:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {tag}: {detail}")
    return ok


def _learn_and_revisit(world, seed: int, strategy: RelationStrategy):
    """One learning tour plus one reverse tour; returns (outcomes, candidates)."""
    engine = Engine(world, EngineConfig(strategy=strategy), seed=seed)
    pose = start_pose(world)
    order = learning_order(world)
    actions = tour_actions(world, order, pose)
    actions += tour_actions(world, list(reversed(order)), pose)
    outcomes, candidates = [], []
    for action in actions:
        result = apply_action(engine, action)
        if result.prediction_correct is not None:
            outcomes.append(result.prediction_correct)
        if result.candidate_count is not None:
            candidates.append(result.candidate_count)
    return outcomes, candidates


def test_accept_1_revisit_predictions_across_100_worlds():
    """Shift predictions on revisits: >=99% correct across 100 random rooms,
    while the edge-free ablation faces >1.5 candidates and does far worse."""
    t0 = time.perf_counter()
    hits = total = 0
    ablated_hits = ablated_total = 0
    candidate_counts = []
    for seed in range(100):
        world = generate_world(seed_stream(seed, "world"), max_link=3.2)
        outcomes, _ = _learn_and_revisit(world, seed,
                                         RelationStrategy.WITH_REVERSE)
        hits += sum(outcomes)
        total += len(outcomes)
        outcomes, candidates = _learn_and_revisit(world, seed,
                                                  RelationStrategy.DISABLED)
        ablated_hits += sum(outcomes)
        ablated_total += len(outcomes)
        candidate_counts.extend(candidates)
    elapsed = time.perf_counter() - t0
    accuracy = hits / total
    ablated = ablated_hits / ablated_total
    mean_candidates = sum(candidate_counts) / len(candidate_counts)
    ok = (accuracy >= 0.99
          and mean_candidates > 1.5
          and ablated <= accuracy - 0.25
          and elapsed < 60.0)
    assert _verdict(
        "1 revisit predictions", ok,
        f"accuracy={accuracy:.4f} (n={total}) ablated={ablated:.4f} "
        f"mean_candidates={mean_candidates:.1f} elapsed={elapsed:.1f}s")


def test_accept_2_path_integration_over_500_steps():
    """A 500-step wander with one part held: the tracked part code matches a
    ground-truth re-encode >=99% of steps, phase drift stays under 1e-6."""
    seed = 2026
    world = generate_world(seed_stream(seed, "world"))
    engine = Engine(world, seed=seed)
    part_id = learning_order(world)[0]
    part_pos = world.part(part_id).position
    engine.attend(part_id)

    pose = start_pose(world)
    actions = random_walk_actions(world, seed_stream(seed, "tour"), pose,
                                  500, part_id)
    # independent dead-reckoning oracle, plain trig on the scripted actions
    ox, oy = world.agent_start
    oh = world.agent_heading
    matches = moves = 0
    worst_phase = 0.0
    for action in actions:
        result = apply_action(engine, action)
        worst_phase = max(worst_phase, result.phase_error)
        if action["kind"] == "TURN":
            oh = (oh + action["angle"]) % (2.0 * math.pi)
            continue
        distance = action["distance"]
        ox += distance * math.cos(oh)
        oy += distance * math.sin(oh)
        moves += 1
        truth = engine.codes.ovc.encode(vec_sub(part_pos, (ox, oy)))
        if engine.active_ovc == truth:
            matches += 1
    fraction = matches / moves
    ok = moves == 500 and fraction >= 0.99 and worst_phase < 1e-6
    assert _verdict(
        "2 path integration", ok,
        f"code_match={fraction:.4f} over {moves} moves "
        f"max_phase_error={worst_phase:.2e}")


def test_accept_3_node_and_edge_counts_saturate():
    """Random tours of 100, 1000, and 10000 attends on an 8-part room always
    end with exactly 8 nodes and at most 56 directed edges."""
    seed = 31
    t0 = time.perf_counter()
    counts = []
    for attends in (100, 1000, 10000):
        world = generate_world(seed_stream(seed, "world"))
        engine = Engine(world, seed=seed)
        pose = start_pose(world)
        order = random_tour_order(seed_stream(seed + attends, "tour"),
                                  len(world.parts), attends)
        for action in tour_actions(world, order, pose):
            apply_action(engine, action)
        counts.append((engine.graph.node_count(), engine.graph.edge_count()))
    elapsed = time.perf_counter() - t0
    ok = all(nodes == 8 and edges <= 56 for nodes, edges in counts)
    assert _verdict(
        "3 map saturation", ok,
        f"(nodes, edges) per run={counts} elapsed={elapsed:.1f}s")


def test_accept_4_chain_decode_stays_cell_accurate():
    """Re-anchoring each hop on the stored grid cell keeps chained position
    estimates within 0.1866 m, while bin dead reckoning drifts well past 2x
    that; the drifting estimate still respects the summed bin tolerances."""
    seed = 7
    world = generate_world(seed_stream(seed, "world"), max_link=3.2)
    engine = Engine(world, seed=seed)
    pose = start_pose(world)
    order = learning_order(world)
    node_of = {}
    for action in tour_actions(world, order, pose):
        result = apply_action(engine, action)
        if result.action == "ATTEND":
            node_of[result.part_id] = result.node_id
    chain = [node_of[p] for p in order]
    start = world.part(order[0]).position
    codes = engine.codes
    truth = [world.part(p).position for p in order]

    fine = chain_positions(engine.graph, codes, chain, start)
    coarse = coarse_chain_positions(engine.graph, codes, chain, start)
    fine_errors = [vec_dist(e, t) for e, t in zip(fine, truth)]
    coarse_errors = [vec_dist(e, t) for e, t in zip(coarse, truth)]

    budget = 0.0
    coarse_bounded = True
    for (a, b), error in zip(zip(chain, chain[1:]), coarse_errors[1:]):
        relation = engine.graph.infer_relation(a, b,
                                               RelationStrategy.WITH_REVERSE)
        budget += codes.disp.half_width(relation.disp_bin.ring)
        coarse_bounded &= error <= budget + 1e-9
    fine_ok = max(fine_errors) <= 0.1866 + 1e-9
    ratio_ok = max(coarse_errors) > 2.0 * max(fine_errors)
    ok = fine_ok and coarse_bounded and ratio_ok
    assert _verdict(
        "4 chain decoding", ok,
        f"anchored_max={max(fine_errors):.4f}m (bound 0.1866) "
        f"coarse_max={max(coarse_errors):.4f}m "
        f"summed_bin_budget={budget:.2f}m over {len(chain) - 1} hops")


def test_accept_5_relation_queries_and_consolidation():
    """On a learned A->B->C chain: the reverse query negates the stored hop
    exactly, the two-hop aggregate lands within the summed bin tolerances,
    and one consolidation pass fills all 6 ordered pairs, idempotently."""
    rng = seed_stream(9, "world")
    descriptors = sample_descriptors(rng, 3, 256, 16, 0.75)
    positions = [(2.0, 5.0), (5.0, 6.0), (8.0, 4.0)]
    parts = tuple(Part(i, pos, d)
                  for i, (pos, d) in enumerate(zip(positions, descriptors)))
    world = World("triple", 10.0, 10.0, parts, (1.5, 5.0), 0.0)
    engine = Engine(world, seed=9)
    node_of = {}
    for action in tour_actions(world, [0, 1, 2], start_pose(world)):
        result = apply_action(engine, action)
        if result.action == "ATTEND":
            node_of[result.part_id] = result.node_id
    graph, disp = engine.graph, engine.codes.disp
    a, b, c = node_of[0], node_of[1], node_of[2]

    ab = graph.lookup_edge(a, b)
    bc = graph.lookup_edge(b, c)
    rel_ab = graph.infer_relation(a, b, RelationStrategy.LEARNED_ONLY)
    rel_ba = graph.infer_relation(b, a, RelationStrategy.WITH_REVERSE)
    reverse_exact = (graph.lookup_edge(b, a) is None
                     and rel_ba.vector == vec_neg(rel_ab.vector)
                     and rel_ba.disp_bin == disp.negate(ab))

    rel_ac = graph.infer_relation(a, c, RelationStrategy.PATH_AGGREGATE)
    tolerance = disp.half_width(ab.ring) + disp.half_width(bc.ring)
    aggregate_error = vec_dist(rel_ac.vector, (6.0, -1.0))
    aggregate_ok = rel_ac.hops == 2 and aggregate_error <= tolerance + 1e-9

    first = engine.consolidate(2)
    pairs = [(x, y) for x in (a, b, c) for y in (a, b, c) if x != y]
    complete = (graph.edge_count() == 6
                and all(graph.lookup_edge(x, y) is not None for x, y in pairs)
                and graph.edge_provenance(a, b) is Provenance.OBSERVED
                and graph.edge_provenance(c, a) is Provenance.CONSOLIDATED)
    before = graph.to_json()
    second = engine.consolidate(2)
    idempotent = (first.consolidated == 4 and second.consolidated == 0
                  and graph.to_json() == before)

    ok = reverse_exact and aggregate_ok and complete and idempotent
    assert _verdict(
        "5 relation queries", ok,
        f"reverse_exact={reverse_exact} "
        f"aggregate_error={aggregate_error:.3f}m (tol {tolerance:.3f}) "
        f"consolidated={first.consolidated} idempotent={idempotent}")


def test_accept_6_cli_reruns_are_byte_identical(tmp_path):
    """Two fresh-process CLI runs of the same scenario write identical bytes."""
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "partmap.cli", "run", str(QUICKSTART),
             "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(out)
    same = {
        name: (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()
        for name in ("metrics.csv", "graph.json", "graph.dot", "trace.json")
    }
    ok = all(same.values())
    assert _verdict(
        "6 reproducible runs", ok,
        "byte-identical: " + " ".join(f"{k}={v}" for k, v in same.items()))


def test_accept_7_phase_arithmetic_matches_brute_force():
    """Phase differences equal an exhaustive 5x5 search on 10^4 random pairs,
    candidate translate sets equal a wide scan, all inside 10 seconds."""
    codes = build_codes(EngineConfig())
    grid, r_max = codes.grid, codes.ovc.r_max
    rng = seed_stream(77, "engine")
    t0 = time.perf_counter()

    mismatches = 0
    pairs = [(GridPhase(rng.random(), rng.random()),
              GridPhase(rng.random(), rng.random())) for _ in range(10_000)]
    for a, b in pairs:
        du = (b.u - a.u) % 1.0
        dv = (b.v - a.v) % 1.0
        best = None
        for i in range(-2, 3):
            for j in range(-2, 3):
                x = (du + i) * grid.b1[0] + (dv + j) * grid.b2[0]
                y = (du + i) * grid.b1[1] + (dv + j) * grid.b2[1]
                key = (x * x + y * y, i, j)
                if best is None or key < best[0]:
                    best = (key, (x, y))
        if grid.diff(a, b) != best[1]:
            mismatches += 1

    membership_bad = 0
    for a, b in pairs[:300]:
        base = grid.diff(a, b)
        got = grid.translates_within(base, r_max)
        expect = []
        for i in range(-12, 13):
            for j in range(-12, 13):
                x = base[0] + i * grid.b1[0] + j * grid.b2[0]
                y = base[1] + i * grid.b1[1] + j * grid.b2[1]
                if math.hypot(x, y) <= r_max * (1.0 + 1e-12):
                    expect.append((x, y))
        if got != expect:
            membership_bad += 1

    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and membership_bad == 0 and elapsed < 10.0
    assert _verdict(
        "7 phase arithmetic", ok,
        f"diff_mismatches={mismatches}/10000 "
        f"candidate_set_mismatches={membership_bad}/300 "
        f"elapsed={elapsed:.1f}s")
