"""Fast-learned memory graph.

Nodes are allocated one per attended part instance: each carries a sparse
feature descriptor, a sparse engram index pattern sampled at allocation, and
(once observed) the part's grid cell. Directed edges carry the coarse
displacement bin between the two parts and are written in one shot, last
write wins. The graph only ever returns what was stored; multi-hop inference
and offline consolidation are explicit, separate operations.

Not thread safe: one writer at a time, matching single-agent use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .codes import DispBin, DispCodebook, GridCell, GridPhase, Vec, ZERO_DISP, vec_add, vec_neg
from .config import RelationStrategy
from .errors import PatternSpaceExhausted, SelfEdge, UnknownNode

# Sparse binary pattern, stored as the set of on-bit indices.
Descriptor = frozenset[int]


def descriptor_similarity(a: Descriptor, b: Descriptor, bits: int) -> float:
    """Overlap count normalized by the nominal on-bit count."""
    return len(a & b) / bits


def sample_descriptor(rng: np.random.Generator, dim: int, bits: int) -> Descriptor:
    return frozenset(int(i) for i in rng.choice(dim, size=bits, replace=False))


class Provenance(Enum):
    OBSERVED = "OBSERVED"
    CONSOLIDATED = "CONSOLIDATED"


@dataclass(frozen=True)
class NodeRecord:
    id: int
    descriptor: Descriptor
    part_grid: GridCell | None
    environment: str
    engram: frozenset[int] | None
    # Continuous companion of part_grid, kept because repeated quantization
    # would leak cell-sized error into every downstream prediction. Not
    # serialized; imports fall back to the cell center.
    part_phase: GridPhase | None


@dataclass(frozen=True)
class EdgeRecord:
    src: int
    dst: int
    disp: DispBin
    provenance: Provenance


@dataclass(frozen=True)
class Relation:
    """An answered relation query: estimated displacement and path length.

    ``disp_bin`` is the stored (or negated stored) bin when the answer came
    from a single edge; multi-hop aggregates have no single bin.
    """

    vector: Vec
    hops: int
    disp_bin: DispBin | None


class MemoryGraph:
    def __init__(self, disp_code: DispCodebook, rng: np.random.Generator,
                 engram_dim: int = 2048, engram_bits: int = 40,
                 overlap_max: int = 10, descriptor_bits: int = 16,
                 similarity_threshold: float = 0.75,
                 max_resample: int = 100):
        self._disp = disp_code
        self._rng = rng
        self.engram_dim = engram_dim
        self.engram_bits = engram_bits
        self.overlap_max = overlap_max
        self.descriptor_bits = descriptor_bits
        self.similarity_threshold = similarity_threshold
        self.max_resample = max_resample
        self._nodes: dict[int, NodeRecord] = {}
        self._edges: dict[tuple[int, int], EdgeRecord] = {}
        self._adjacency: dict[int, set[int]] = {}
        self._next_id = 0
        self.relocations = 0

    # -- nodes ------------------------------------------------------------

    def node(self, node_id: int) -> NodeRecord:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(f"no node {node_id}") from None

    def node_ids(self) -> list[int]:
        return sorted(self._nodes)

    def node_count(self) -> int:
        return len(self._nodes)

    def allocate_node(self, descriptor: Descriptor, environment: str) -> int:
        """Create a node with a fresh engram pattern; id is never reused."""
        engram = self._sample_engram()
        node_id = self._next_id
        self._next_id += 1
        self._nodes[node_id] = NodeRecord(node_id, descriptor, None,
                                          environment, engram, None)
        self._adjacency[node_id] = set()
        return node_id

    def _sample_engram(self) -> frozenset[int]:
        existing = [n.engram for n in self._nodes.values() if n.engram is not None]
        for _ in range(self.max_resample + 1):
            pattern = frozenset(int(i) for i in self._rng.choice(
                self.engram_dim, size=self.engram_bits, replace=False))
            if all(len(pattern & other) <= self.overlap_max for other in existing):
                return pattern
        raise PatternSpaceExhausted(
            f"no pattern with pairwise overlap <= {self.overlap_max} found "
            f"after {self.max_resample} resamples")

    def associate_grid(self, node_id: int, cell: GridCell,
                       phase: GridPhase | None = None) -> NodeRecord:
        """Bind (or rebind) a node to a grid cell. Rebinding to a different
        cell counts as a relocation."""
        rec = self.node(node_id)
        if rec.part_grid is not None and rec.part_grid != cell:
            self.relocations += 1
        rec = replace(rec, part_grid=cell, part_phase=phase)
        self._nodes[node_id] = rec
        return rec

    def recall_node(self, descriptor: Descriptor, grid_hint: GridCell | None,
                    environment: str) -> int | None:
        """The unique same-environment node matching the descriptor.

        If several match, the grid hint must single one out; otherwise the
        caller has to disambiguate by observing.
        """
        matches = [n for n in self._nodes.values()
                   if n.environment == environment
                   and descriptor_similarity(descriptor, n.descriptor,
                                             self.descriptor_bits)
                   >= self.similarity_threshold]
        if len(matches) == 1:
            return matches[0].id
        if len(matches) > 1 and grid_hint is not None:
            hinted = [n for n in matches if n.part_grid == grid_hint]
            if len(hinted) == 1:
                return hinted[0].id
        return None

    # -- edges ------------------------------------------------------------

    def learn_edge(self, src: int, dst: int, disp: DispBin) -> EdgeRecord:
        """Store a displacement in one shot. Last write wins."""
        if src == dst:
            raise SelfEdge(f"node {src} cannot relate to itself")
        self.node(src)
        self.node(dst)
        edge = EdgeRecord(src, dst, disp, Provenance.OBSERVED)
        self._edges[(src, dst)] = edge
        self._adjacency[src].add(dst)
        self._adjacency[dst].add(src)
        return edge

    def lookup_edge(self, src: int, dst: int) -> DispBin | None:
        """The stored bin for the ordered pair, or None. Never infers."""
        edge = self._edges.get((src, dst))
        return edge.disp if edge is not None else None

    def edge_provenance(self, src: int, dst: int) -> Provenance | None:
        edge = self._edges.get((src, dst))
        return edge.provenance if edge is not None else None

    def edges(self) -> list[EdgeRecord]:
        return [self._edges[key] for key in sorted(self._edges)]

    def edge_count(self) -> int:
        return len(self._edges)

    def consolidated_count(self) -> int:
        return sum(1 for e in self._edges.values()
                   if e.provenance is Provenance.CONSOLIDATED)

    def neighbors(self, node_id: int) -> frozenset[int]:
        """Nodes this one was observed adjacent to, in either direction.

        Consolidation does not extend this set; it reflects actual attended
        transitions only.
        """
        self.node(node_id)
        return frozenset(self._adjacency[node_id])

    # -- inference --------------------------------------------------------

    def infer_relation(self, src: int, dst: int,
                       strategy: RelationStrategy) -> Relation | None:
        self.node(src)
        self.node(dst)
        if src == dst:
            return Relation((0.0, 0.0), 0, None)
        if strategy is RelationStrategy.DISABLED:
            return None
        stored = self.lookup_edge(src, dst)
        if stored is not None:
            return Relation(self._disp.decode(stored), 1, stored)
        if strategy is RelationStrategy.LEARNED_ONLY:
            return None
        reverse = self.lookup_edge(dst, src)
        if reverse is not None:
            return Relation(vec_neg(self._disp.decode(reverse)), 1,
                            self._disp.negate(reverse))
        if strategy is RelationStrategy.WITH_REVERSE:
            return None
        return self._aggregate_path(src, dst, hop_limit=None,
                                    observed_only=False)

    def _search_edges(self, observed_only: bool) -> dict[int, list[tuple[int, Vec]]]:
        """Traversal map: every stored edge usable forward, or backward with
        its decoded center negated."""
        out: dict[int, list[tuple[int, Vec]]] = {n: [] for n in self._nodes}
        for (src, dst), edge in self._edges.items():
            if observed_only and edge.provenance is not Provenance.OBSERVED:
                continue
            center = self._disp.decode(edge.disp)
            out[src].append((dst, center))
            out[dst].append((src, vec_neg(center)))
        for lst in out.values():
            lst.sort(key=lambda item: item[0])
        return out

    def _aggregate_path(self, src: int, dst: int, hop_limit: int | None,
                        observed_only: bool,
                        search: dict[int, list[tuple[int, Vec]]] | None = None,
                        ) -> Relation | None:
        if search is None:
            search = self._search_edges(observed_only)
        # breadth-first, neighbors in id order: the fewest-hop path found
        # first is the deterministic winner among ties
        frontier = [(src, (0.0, 0.0))]
        seen = {src}
        hops = 0
        while frontier:
            if hop_limit is not None and hops >= hop_limit:
                return None
            hops += 1
            nxt: list[tuple[int, Vec]] = []
            for node, acc in frontier:
                for other, center in search[node]:
                    if other in seen:
                        continue
                    total = vec_add(acc, center)
                    if other == dst:
                        return Relation(total, hops, None)
                    seen.add(other)
                    nxt.append((other, total))
            frontier = nxt
        return None

    def consolidate(self, hop_limit: int) -> int:
        """Fill in missing edges from multi-hop observed paths.

        Paths are aggregated over observed edges only, so rerunning with the
        same hop limit rewrites identical records: idempotent, and never
        removes anything.
        """
        if hop_limit < 1:
            raise ValueError("hop_limit must be >= 1")
        search = self._search_edges(observed_only=True)
        new_edges: dict[tuple[int, int], EdgeRecord] = {}
        for src in self.node_ids():
            for dst in self.node_ids():
                if src == dst:
                    continue
                existing = self._edges.get((src, dst))
                if existing is not None and existing.provenance is Provenance.OBSERVED:
                    continue
                rel = self._aggregate_path(src, dst, hop_limit,
                                           observed_only=True, search=search)
                if rel is None:
                    continue
                disp = self._disp.encode((0.0, 0.0), rel.vector)
                new_edges[(src, dst)] = EdgeRecord(src, dst, disp,
                                                   Provenance.CONSOLIDATED)
        changed = 0
        for key, edge in new_edges.items():
            if self._edges.get(key) != edge:
                changed += 1
            self._edges[key] = edge
        return changed

    # -- export / import ---------------------------------------------------

    def to_json(self) -> str:
        nodes = []
        for node_id in self.node_ids():
            rec = self._nodes[node_id]
            nodes.append({
                "id": rec.id,
                "descriptor_bits": sorted(rec.descriptor),
                "part_grid": None if rec.part_grid is None
                             else [rec.part_grid.iu, rec.part_grid.iv],
                "environment": rec.environment,
            })
        edges = []
        for edge in self.edges():
            disp = edge.disp
            edges.append({
                "from": edge.src,
                "to": edge.dst,
                "dir_bin": None if disp.is_zero else disp.dir_bin,
                "ring": None if disp.is_zero else disp.ring,
                "provenance": edge.provenance.value,
            })
        return json.dumps({"nodes": nodes, "edges": edges}, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str, disp_code: DispCodebook,
                  grid_cell_phase=None, **kwargs) -> "MemoryGraph":
        """Rebuild a graph from its JSON export.

        Engram patterns are not serialized, so imported nodes have none;
        ``grid_cell_phase`` (cell -> phase) optionally restores continuous
        phases, defaulting to nothing.
        """
        raw = json.loads(text)
        graph = cls(disp_code, rng=np.random.default_rng(0), **kwargs)
        for item in raw.get("nodes", []):
            cell = (None if item["part_grid"] is None
                    else GridCell(*item["part_grid"]))
            phase = None
            if cell is not None and grid_cell_phase is not None:
                phase = grid_cell_phase(cell)
            rec = NodeRecord(item["id"], frozenset(item["descriptor_bits"]),
                             cell, item["environment"], None, phase)
            graph._nodes[rec.id] = rec
            graph._adjacency[rec.id] = set()
            graph._next_id = max(graph._next_id, rec.id + 1)
        for item in raw.get("edges", []):
            disp = (ZERO_DISP if item["dir_bin"] is None
                    else DispBin(item["dir_bin"], item["ring"]))
            edge = EdgeRecord(item["from"], item["to"], disp,
                              Provenance(item["provenance"]))
            graph._edges[(edge.src, edge.dst)] = edge
            if edge.provenance is Provenance.OBSERVED:
                graph._adjacency[edge.src].add(edge.dst)
                graph._adjacency[edge.dst].add(edge.src)
        return graph

    def to_dot(self) -> str:
        lines = ["digraph memory_graph {"]
        for node_id in self.node_ids():
            rec = self._nodes[node_id]
            grid = ("-" if rec.part_grid is None
                    else f"({rec.part_grid.iu},{rec.part_grid.iv})")
            lines.append(f'  "{node_id}" [label="{node_id} @{grid}"];')
        for edge in self.edges():
            label = ("zero" if edge.disp.is_zero
                     else f"d{edge.disp.dir_bin} r{edge.disp.ring}")
            style = ("" if edge.provenance is Provenance.OBSERVED
                     else ", style=dashed")
            lines.append(f'  "{edge.src}" -> "{edge.dst}" '
                         f'[label="{label}"{style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"
