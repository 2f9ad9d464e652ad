"""The agent: pose and phase tracking, sensing, attention, map learning.

Position is carried three ways at once, on purpose. The true pose drives
sensing. The grid phase is the agent's own position signal: exact within one
lattice period, ambiguous across periods. The active part vector is the
coarse-but-unambiguous complement: which part is attended and roughly where
it sits relative to the agent. The engine's job is to keep the three
consistent while actions stream in, and to resolve the lattice ambiguity
whenever attention jumps to a remembered part.

Resolution works on candidates: all lattice translates of the remembered
phase offset that land inside sensing range. A stored displacement bin picks
the translate it is consistent with; with no relation available the engine
falls back to the translate nearest the current active vector.
"""

from __future__ import annotations

from dataclasses import dataclass

from .codes import (GridCell, GridPhase, Heading, OvcCell, Vec, allo_to_ego,
                    ego_to_allo, vec_add, vec_dist, vec_norm, vec_sub)
from .config import CodeSuite, EngineConfig, RelationStrategy, build_codes, seed_stream
from .errors import (AgentOnPart, NoActivePart, NoCandidateInRange,
                     OutOfSensorRange)
from .graph import Descriptor, MemoryGraph, Relation
from .world import World

RESOLVED_EDGE = "EDGE"
RESOLVED_CONTINUITY = "CONTINUITY"
RESOLVED_FALLBACK = "FALLBACK"


@dataclass(frozen=True)
class SenseResult:
    """One noiseless observation of a part from the current pose."""

    part_id: int
    descriptor: Descriptor
    ego_vector: Vec
    allo_vector: Vec
    ovc: OvcCell


@dataclass(frozen=True)
class Candidate:
    """A lattice-consistent hypothesis for a remembered part's offset."""

    vector: Vec
    ovc: OvcCell


@dataclass(frozen=True)
class ShiftPrediction:
    vector: Vec
    ovc: OvcCell
    candidate_count: int
    resolved_by: str
    relation: Relation | None


@dataclass(frozen=True)
class StepResult:
    """Per-action record, one row per applied action."""

    step: int
    action: str
    node_count: int
    edge_count: int
    phase_error: float
    ovc_error_m: float | None = None
    prediction_correct: bool | None = None
    predicted_ovc: OvcCell | None = None
    candidate_count: int | None = None
    resolved_by: str | None = None
    part_id: int | None = None
    node_id: int | None = None
    new_node: bool = False
    range_exceeded: bool = False
    consolidated: int | None = None


class Engine:
    """Single-agent world interface around a memory graph."""

    def __init__(self, world: World, config: EngineConfig | None = None,
                 seed: int = 0):
        self.world = world
        self.config = config or EngineConfig()
        self.codes: CodeSuite = build_codes(self.config)
        self.graph = MemoryGraph(
            self.codes.disp,
            rng=seed_stream(seed, "engram"),
            engram_dim=self.config.engram.dim,
            engram_bits=self.config.engram.bits,
            overlap_max=self.config.engram.overlap_max,
            descriptor_bits=self.config.descriptor.bits,
            similarity_threshold=self.config.descriptor.similarity_threshold,
        )
        self._eps = 1e-9
        self._pos: Vec = world.agent_start
        self._heading: Heading = self.codes.heading.make(world.agent_heading)
        rng = seed_stream(seed, "engine")
        # the phase origin is arbitrary: only phase differences matter
        self._phase0 = GridPhase(float(rng.random()), float(rng.random()))
        self._pos0 = self._pos
        self._phase = self._phase0
        self._active_node: int | None = None
        self._active_part: int | None = None
        self._active_vec: Vec | None = None
        self._active_ovc: OvcCell | None = None
        self._step = 0

    # -- read-only state ----------------------------------------------------

    @property
    def position(self) -> Vec:
        return self._pos

    @property
    def heading(self) -> Heading:
        return self._heading

    @property
    def phase(self) -> GridPhase:
        return self._phase

    @property
    def start_position(self) -> Vec:
        return self._pos0

    @property
    def start_phase(self) -> GridPhase:
        return self._phase0

    @property
    def active_node(self) -> int | None:
        return self._active_node

    @property
    def active_part(self) -> int | None:
        return self._active_part

    @property
    def active_vector(self) -> Vec | None:
        return self._active_vec

    @property
    def active_ovc(self) -> OvcCell | None:
        return self._active_ovc

    @property
    def steps(self) -> int:
        return self._step

    def phase_error(self) -> float:
        """Drift of the incrementally advanced phase against a one-shot
        advance over the net displacement from the start."""
        reference = self.codes.grid.advance(self._phase0,
                                            vec_sub(self._pos, self._pos0))
        return self.codes.grid.torus_distance(self._phase, reference)

    # -- sensing ------------------------------------------------------------

    def sense(self, part_id: int) -> SenseResult:
        part = self.world.part(part_id)
        allo = vec_sub(part.position, self._pos)
        r = vec_norm(allo)
        if r <= self._eps:
            raise AgentOnPart(f"agent sits on part {part_id}")
        if r > self.codes.ovc.r_max:
            raise OutOfSensorRange(
                f"part {part_id} at {r:.3f} m, range {self.codes.ovc.r_max:.3f} m")
        return SenseResult(part_id, part.descriptor,
                           allo_to_ego(allo, self._heading), allo,
                           self.codes.ovc.encode(allo))

    # -- movement -----------------------------------------------------------

    def turn(self, angle: float) -> StepResult:
        self._heading = self.codes.heading.turned(self._heading, angle)
        return self._result("TURN")

    def move(self, distance: float) -> StepResult:
        """Step ``distance`` meters along the current heading.

        The grid phase advances by the same displacement, and the active
        part vector is counter-shifted; the room has no walls, so nothing
        blocks the step. A part carried out of sensing range is dropped.
        """
        allo = ego_to_allo((distance, 0.0), self._heading)
        self._pos = vec_add(self._pos, allo)
        self._phase = self.codes.grid.advance(self._phase, allo)
        range_exceeded = False
        if self._active_node is not None:
            new_vec = vec_sub(self._active_vec, allo)
            r = vec_norm(new_vec)
            if r > self.codes.ovc.r_max or r <= self._eps:
                self._clear_active()
                range_exceeded = True
            else:
                self._active_vec = new_vec
                self._active_ovc = self.codes.ovc.encode(new_vec)
        return self._result("MOVE", range_exceeded=range_exceeded)

    def _clear_active(self) -> None:
        self._active_node = None
        self._active_part = None
        self._active_vec = None
        self._active_ovc = None

    # -- ambiguity resolution -----------------------------------------------

    def candidate_ovcs(self, part_phase: GridPhase) -> list[Candidate]:
        """Every in-range offset consistent with a remembered part phase.

        The phase pins the part only up to lattice translates; each translate
        inside sensing range is one candidate, in deterministic order.
        """
        base = self.codes.grid.diff(self._phase, part_phase)
        out: list[Candidate] = []
        for v in self.codes.grid.translates_within(base, self.codes.ovc.r_max):
            if vec_norm(v) <= self._eps:
                continue  # the agent itself; no direction to encode
            out.append(Candidate(v, self.codes.ovc.encode(v)))
        if not out:
            raise NoCandidateInRange("no lattice translate in sensing range")
        return out

    def predict_shift(self, node_id: int) -> ShiftPrediction:
        """Predict the offset of a remembered part before looking at it.

        Needs an attended anchor: the stored relation (or, failing that, the
        current vector itself) steers the choice among lattice candidates.
        """
        if self._active_node is None:
            raise NoActivePart("prediction needs an attended part")
        record = self.graph.node(node_id)
        if record.part_grid is None:
            raise NoCandidateInRange(f"node {node_id} has no grid binding")
        phase = record.part_phase
        if phase is None:
            phase = self.codes.grid.cell_center(record.part_grid)
        candidates = self.candidate_ovcs(phase)
        relation = self.graph.infer_relation(self._active_node, node_id,
                                             self.config.strategy)
        pick, resolved_by = self._resolve(candidates, relation)
        return ShiftPrediction(pick.vector, pick.ovc, len(candidates),
                               resolved_by, relation)

    def _resolve(self, candidates: list[Candidate],
                 relation: Relation | None) -> tuple[Candidate, str]:
        pool = candidates
        if relation is None:
            # continuity prior: without a relation, the least surprising
            # candidate is the one nearest the vector already carried
            preferred = self._active_vec
            resolved_by = RESOLVED_FALLBACK
        else:
            preferred = vec_add(self._active_vec, relation.vector)
            resolved_by = RESOLVED_EDGE
            if relation.disp_bin is not None and not relation.disp_bin.is_zero:
                kept = [c for c in candidates
                        if self.codes.disp.encode(self._active_vec, c.vector)
                        == relation.disp_bin]
                if kept:
                    pool = kept
                else:
                    resolved_by = RESOLVED_FALLBACK
        best = min(pool, key=lambda c: (vec_dist(c.vector, preferred),
                                        c.ovc.ring, c.ovc.dir_bin))
        return best, resolved_by

    # -- attention ----------------------------------------------------------

    def attend(self, part_id: int) -> StepResult:
        """Shift attention to a part: recall, predict, observe, learn.

        A recalled node with an attended anchor triggers a prediction first;
        its hit or miss is scored against the actual observation. The
        observation then updates the graph (new node, grid binding, and an
        edge from the previous attended part) and becomes the new anchor.
        """
        s = self.sense(part_id)
        true_phase = self.codes.grid.advance(self._phase, s.allo_vector)
        true_cell = self.codes.grid.quantize(true_phase)
        recalled = self.graph.recall_node(s.descriptor, true_cell,
                                          self.world.environment)

        prediction_correct = None
        predicted_ovc = None
        candidate_count = None
        resolved_by = None
        if self._active_node is not None and recalled is not None:
            if recalled == self._active_node:
                resolved_by = RESOLVED_CONTINUITY
            elif self.graph.node(recalled).part_grid is not None:
                prediction = self.predict_shift(recalled)
                predicted_ovc = prediction.ovc
                candidate_count = prediction.candidate_count
                resolved_by = prediction.resolved_by
                prediction_correct = prediction.ovc == s.ovc

        new_node = recalled is None
        node_id = (self.graph.allocate_node(s.descriptor,
                                            self.world.environment)
                   if new_node else recalled)
        self.graph.associate_grid(node_id, true_cell, true_phase)
        if self._active_node is not None and self._active_node != node_id:
            disp = self.codes.disp.encode(self._active_vec, s.allo_vector)
            self.graph.learn_edge(self._active_node, node_id, disp)

        self._active_node = node_id
        self._active_part = part_id
        self._active_vec = s.allo_vector
        self._active_ovc = s.ovc
        return self._result("ATTEND", part_id=part_id, node_id=node_id,
                            new_node=new_node,
                            prediction_correct=prediction_correct,
                            predicted_ovc=predicted_ovc,
                            candidate_count=candidate_count,
                            resolved_by=resolved_by)

    def consolidate(self, hops: int) -> StepResult:
        changed = self.graph.consolidate(hops)
        return self._result("CONSOLIDATE", consolidated=changed)

    # -- bookkeeping ---------------------------------------------------------

    def _result(self, action: str, **kw) -> StepResult:
        self._step += 1
        ovc_error = None
        if self._active_ovc is not None:
            ovc_error = vec_dist(self.codes.ovc.decode(self._active_ovc),
                                 self._active_vec)
        return StepResult(step=self._step, action=action,
                          node_count=self.graph.node_count(),
                          edge_count=self.graph.edge_count(),
                          phase_error=self.phase_error(),
                          ovc_error_m=ovc_error, **kw)


# -- reading a learned map back into positions -------------------------------

def _cell_anchor(graph: MemoryGraph, grid, node_id: int) -> Vec:
    cell = graph.node(node_id).part_grid
    if cell is None:
        raise NoCandidateInRange(f"node {node_id} has no grid binding")
    return grid.point(grid.cell_center(cell))


def chain_positions(graph: MemoryGraph, codes: CodeSuite, node_ids: list[int],
                    start_position: Vec,
                    strategy: RelationStrategy = RelationStrategy.WITH_REVERSE,
                    ) -> list[Vec]:
    """Absolute position estimates along a chain of remembered nodes.

    Works from the serialized map alone: stored grid cells plus stored
    displacement bins, anchored at the first node's true position. Stored
    phases sit in the run's arbitrary phase frame, so the first node also
    calibrates the frame offset; after that each hop proposes the next
    position from the displacement bin and snaps it to the lattice translate
    of the next node's cell center that agrees with the bin (nearest to the
    proposal as tie break). The snap re-anchors every hop: position error
    stays bounded by cell quantization instead of accumulating bin error.
    """
    grid, disp = codes.grid, codes.disp
    frame = vec_sub(_cell_anchor(graph, grid, node_ids[0]), start_position)
    positions = [start_position]
    current = start_position
    for a, b in zip(node_ids, node_ids[1:]):
        relation = graph.infer_relation(a, b, strategy)
        if relation is None:
            raise NoCandidateInRange(f"no stored relation {a} -> {b}")
        proposal = vec_add(current, relation.vector)
        anchor = vec_sub(_cell_anchor(graph, grid, b), frame)
        nearest = grid.nearest_translate(anchor, proposal)
        pool = [vec_add(nearest, grid.lattice_point(i, j))
                for i in (-1, 0, 1) for j in (-1, 0, 1)]
        if relation.disp_bin is not None and not relation.disp_bin.is_zero:
            kept = [p for p in pool
                    if disp.encode(current, p) == relation.disp_bin]
            if kept:
                pool = kept
        current = min(pool, key=lambda p: (vec_dist(p, proposal), p))
        positions.append(current)
    return positions


def coarse_chain_positions(graph: MemoryGraph, codes: CodeSuite,
                           node_ids: list[int], start_position: Vec,
                           strategy: RelationStrategy = RelationStrategy.WITH_REVERSE,
                           ) -> list[Vec]:
    """Dead-reckoned chain positions from displacement bins alone.

    No lattice snapping: bin-center error accumulates hop over hop. The gap
    between this and :func:`chain_positions` is what the grid code buys."""
    positions = [start_position]
    current = start_position
    for a, b in zip(node_ids, node_ids[1:]):
        relation = graph.infer_relation(a, b, strategy)
        if relation is None:
            raise NoCandidateInRange(f"no stored relation {a} -> {b}")
        current = vec_add(current, relation.vector)
        positions.append(current)
    return positions
