"""Rectangular rooms with point parts, plus scripted walk builders.

Worlds are plain ground truth: part positions, part feature descriptors, and
a starting pose. The builders turn visit plans into action scripts (TURN,
MOVE, ATTEND dicts) while mirroring the agent's pose with the same float
primitives the engine uses, so a script lands the agent exactly where the
builder thinks it does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codes import TWO_PI, Vec, rotate, vec_add, vec_dist, wrap_angle
from .errors import PackingInfeasible, UnknownPart
from .graph import Descriptor, descriptor_similarity, sample_descriptor


@dataclass(frozen=True)
class Part:
    id: int
    position: Vec
    descriptor: Descriptor


@dataclass(frozen=True)
class World:
    environment: str
    width: float
    height: float
    parts: tuple[Part, ...]
    agent_start: Vec
    agent_heading: float

    def __post_init__(self):
        for index, part in enumerate(self.parts):
            if part.id != index:
                raise ValueError("part ids must be 0..n-1 in listed order")

    def part(self, part_id: int) -> Part:
        if not 0 <= part_id < len(self.parts):
            raise UnknownPart(f"no part {part_id} in {self.environment}")
        return self.parts[part_id]

    def contains(self, p: Vec, margin: float = 0.0) -> bool:
        return (margin <= p[0] <= self.width - margin
                and margin <= p[1] <= self.height - margin)


def mst_edges(points: list[Vec]) -> list[tuple[int, int]]:
    """Minimum spanning tree over point distances (Prim, O(n^2))."""
    n = len(points)
    if n <= 1:
        return []
    in_tree = [False] * n
    in_tree[0] = True
    best_dist = [vec_dist(points[0], p) for p in points]
    best_from = [0] * n
    edges: list[tuple[int, int]] = []
    for _ in range(n - 1):
        pick = min((i for i in range(n) if not in_tree[i]),
                   key=lambda i: (best_dist[i], i))
        edges.append((best_from[pick], pick))
        in_tree[pick] = True
        for i in range(n):
            if not in_tree[i]:
                d = vec_dist(points[pick], points[i])
                if d < best_dist[i]:
                    best_dist[i] = d
                    best_from[i] = pick
    return edges


def _mst_longest(points: list[Vec]) -> float:
    if len(points) <= 1:
        return 0.0
    return max(vec_dist(points[a], points[b]) for a, b in mst_edges(points))


def sample_descriptors(rng: np.random.Generator, n: int, dim: int, bits: int,
                       similarity_cap: float) -> list[Descriptor]:
    """Distinct sparse descriptors: pairwise similarity below the cap, so
    recall can never confuse two parts of the same room."""
    out: list[Descriptor] = []
    for _ in range(n):
        for _attempt in range(100):
            d = sample_descriptor(rng, dim, bits)
            if all(descriptor_similarity(d, other, bits) < similarity_cap
                   for other in out):
                out.append(d)
                break
        else:
            raise PackingInfeasible("descriptor space exhausted")
    return out


def generate_world(rng: np.random.Generator, n_parts: int = 8,
                   width: float = 10.0, height: float = 10.0,
                   min_sep: float = 1.2, margin: float = 1.0,
                   max_link: float | None = None,
                   descriptor_dim: int = 256, descriptor_bits: int = 16,
                   similarity_cap: float = 0.75,
                   environment: str = "room-0",
                   agent_clearance: float = 0.5,
                   max_tries: int = 4000) -> World:
    """Sample a room layout.

    Parts are uniform in the margin-inset rectangle, pairwise at least
    ``min_sep`` apart. ``max_link`` additionally caps the longest edge of the
    part-to-part spanning tree, which bounds how coarse the displacement bin
    of any natural attention hop can get; layouts violating it are redrawn.
    """
    if n_parts < 1:
        raise ValueError("need at least one part")
    lo_x, hi_x = margin, width - margin
    lo_y, hi_y = margin, height - margin
    if lo_x >= hi_x or lo_y >= hi_y:
        raise PackingInfeasible("margins leave no interior")

    def draw_point() -> Vec:
        return (float(rng.uniform(lo_x, hi_x)), float(rng.uniform(lo_y, hi_y)))

    positions: list[Vec] = []
    tries = 0
    while True:
        positions.clear()
        while len(positions) < n_parts:
            tries += 1
            if tries > max_tries:
                raise PackingInfeasible(
                    f"could not place {n_parts} parts at min_sep={min_sep} "
                    f"in {width}x{height} after {max_tries} draws")
            p = draw_point()
            if all(vec_dist(p, q) >= min_sep for q in positions):
                positions.append(p)
        if max_link is None or _mst_longest(positions) <= max_link:
            break

    descriptors = sample_descriptors(rng, n_parts, descriptor_dim,
                                     descriptor_bits, similarity_cap)

    for _attempt in range(max_tries):
        start = draw_point()
        if all(vec_dist(start, q) >= agent_clearance for q in positions):
            break
    else:
        raise PackingInfeasible("no agent start clear of all parts")

    parts = tuple(Part(i, positions[i], descriptors[i])
                  for i in range(n_parts))
    heading = float(rng.uniform(0.0, TWO_PI))
    return World(environment, width, height, parts, start, heading)


# -- action scripts ---------------------------------------------------------

def move(distance: float) -> dict:
    return {"kind": "MOVE", "distance": float(distance)}


def turn(angle: float) -> dict:
    return {"kind": "TURN", "angle": float(angle)}


def attend(part_id: int) -> dict:
    return {"kind": "ATTEND", "part": int(part_id)}


def consolidate(hops: int) -> dict:
    return {"kind": "CONSOLIDATE", "hops": int(hops)}


@dataclass
class Pose:
    """Builder-side mirror of the agent pose."""

    position: Vec
    heading: float


def start_pose(world: World) -> Pose:
    return Pose(world.agent_start, wrap_angle(world.agent_heading))


def turn_toward(heading: float, want: float) -> float:
    """Signed turn in (-pi, pi] taking ``heading`` onto ``want``."""
    d = wrap_angle(want - heading)
    if d > math.pi:
        d -= TWO_PI
    return d


def _apply_turn(pose: Pose, angle: float, out: list[dict]) -> None:
    out.append(turn(angle))
    pose.heading = wrap_angle(pose.heading + angle)


def _apply_move(pose: Pose, distance: float, out: list[dict]) -> None:
    out.append(move(distance))
    pose.position = vec_add(pose.position,
                            rotate((distance, 0.0), pose.heading))


def walk_to(pose: Pose, target: Vec, stop_within: float,
            max_step: float, out: list[dict]) -> None:
    """Emit turns and forward steps until the pose is ``stop_within`` of
    the target. Re-aims before every step, so the path is near-straight."""
    while True:
        gap = vec_dist(pose.position, target)
        if gap <= stop_within + 1e-9:
            return
        want = math.atan2(target[1] - pose.position[1],
                          target[0] - pose.position[0])
        angle = turn_toward(pose.heading, want)
        if abs(angle) > 1e-12:
            _apply_turn(pose, angle, out)
        _apply_move(pose, min(max_step, gap - stop_within), out)


def tour_actions(world: World, order: list[int], pose: Pose,
                 approach: float = 1.0, max_step: float = 0.5) -> list[dict]:
    """Walk near each part in order and attend it."""
    out: list[dict] = []
    for part_id in order:
        walk_to(pose, world.part(part_id).position, approach, max_step, out)
        out.append(attend(part_id))
    return out


def euler_order(n: int, edges: list[tuple[int, int]], root: int) -> list[int]:
    """Depth-first tour of a tree, listing a node every time the walk is at
    it. Consecutive entries are always tree edges."""
    children: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in edges:
        children[a].append(b)
        children[b].append(a)
    for lst in children.values():
        lst.sort()
    order: list[int] = []
    seen = {root}

    def visit(node: int) -> None:
        order.append(node)
        for child in children[node]:
            if child not in seen:
                seen.add(child)
                visit(child)
                order.append(node)

    visit(node=root)
    return order


def learning_order(world: World) -> list[int]:
    """Visit plan that keeps every consecutive attend pair one spanning-tree
    link apart: coarse displacement bins stay as fine as the layout allows."""
    points = [p.position for p in world.parts]
    root = min(range(len(points)),
               key=lambda i: (vec_dist(world.agent_start, points[i]), i))
    return euler_order(len(points), mst_edges(points), root)


def random_tour_order(rng: np.random.Generator, n_parts: int,
                      n_attends: int) -> list[int]:
    """Uniform attend sequence without immediate repeats."""
    order: list[int] = []
    prev = -1
    for _ in range(n_attends):
        while True:
            pick = int(rng.integers(n_parts))
            if pick != prev or n_parts == 1:
                break
        order.append(pick)
        prev = pick
    return order


def random_walk_actions(world: World, rng: np.random.Generator, pose: Pose,
                        steps: int, part_id: int,
                        band: tuple[float, float] = (0.8, 6.8),
                        max_step: float = 0.5,
                        margin: float = 0.2) -> list[dict]:
    """Random turn-and-step walk that keeps one part inside a distance band
    and the pose inside the room. Each step is one TURN plus one MOVE."""
    target = world.part(part_id).position
    out: list[dict] = []
    for _ in range(steps):
        for _attempt in range(500):
            want = float(rng.uniform(0.0, TWO_PI))
            step = float(rng.uniform(0.05, max_step))
            angle = turn_toward(pose.heading, want)
            heading2 = wrap_angle(pose.heading + angle)
            landing = vec_add(pose.position, rotate((step, 0.0), heading2))
            if not world.contains(landing, margin):
                continue
            if band[0] <= vec_dist(landing, target) <= band[1]:
                break
        else:
            raise PackingInfeasible("random walk found no admissible step")
        _apply_turn(pose, angle, out)
        _apply_move(pose, step, out)
    return out
