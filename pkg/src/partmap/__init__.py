"""partmap: learn a graph map of a room's parts from scripted walks.

A single hexagonal grid code gives precise-but-ambiguous position; coarse
log-polar part vectors give unambiguous-but-imprecise position; a fast
one-shot memory graph ties part observations together with displacement
bins. The package provides the codes, the graph, an agent engine that keeps
them consistent, and a scenario harness with a CLI around all of it.
"""

from .codes import (DispBin, DispCodebook, GridCell, GridModule, GridPhase,
                    Heading, HeadingCode, OvcCell, OvcCodebook, Vec,
                    ZERO_DISP, allo_to_ego, ego_to_allo, rotate, vec_add,
                    vec_dist, vec_neg, vec_norm, vec_sub, wrap_angle)
from .config import (CodeSuite, DescriptorParams, DispParams, EngineConfig,
                     EngramParams, GridParams, HeadingParams, OvcParams,
                     RelationStrategy, build_codes, config_from_dict,
                     seed_stream)
from .engine import (Candidate, Engine, SenseResult, ShiftPrediction,
                     StepResult, chain_positions, coarse_chain_positions)
from .errors import (AgentOnPart, NoActivePart, NoCandidateInRange,
                     OutOfRange, OutOfSensorRange, PackingInfeasible,
                     PartmapError, PatternSpaceExhausted, ScenarioError,
                     SelfEdge, UnknownNode, UnknownPart)
from .graph import (Descriptor, EdgeRecord, MemoryGraph, NodeRecord,
                    Provenance, Relation, descriptor_similarity,
                    sample_descriptor)
from .metrics import render_metrics_csv, summarize
from .scenario import (RunOutcome, Scenario, build_world, evaluate_assertions,
                       expand_actions, load_scenario, run_scenario,
                       scenario_from_dict)
from .world import (Part, Pose, World, generate_world, learning_order,
                    mst_edges, random_tour_order, random_walk_actions,
                    sample_descriptors, start_pose, tour_actions)

__version__ = "0.1.0"

__all__ = [
    "AgentOnPart", "Candidate", "CodeSuite", "Descriptor",
    "DescriptorParams", "DispBin", "DispCodebook", "DispParams",
    "EdgeRecord", "Engine", "EngineConfig", "EngramParams", "GridCell",
    "GridModule", "GridParams", "GridPhase", "Heading", "HeadingCode",
    "HeadingParams", "MemoryGraph", "NoActivePart", "NoCandidateInRange",
    "NodeRecord", "OutOfRange", "OutOfSensorRange", "OvcCell", "OvcCodebook",
    "OvcParams", "PackingInfeasible", "Part", "PartmapError",
    "PatternSpaceExhausted", "Pose", "Provenance", "Relation",
    "RelationStrategy", "RunOutcome", "Scenario", "ScenarioError",
    "SelfEdge", "SenseResult", "ShiftPrediction", "StepResult", "UnknownNode",
    "UnknownPart", "Vec", "World", "ZERO_DISP", "allo_to_ego",
    "build_codes", "build_world", "chain_positions",
    "coarse_chain_positions", "config_from_dict", "descriptor_similarity",
    "ego_to_allo", "evaluate_assertions", "expand_actions",
    "generate_world", "learning_order", "load_scenario", "mst_edges",
    "random_tour_order", "random_walk_actions", "render_metrics_csv",
    "rotate", "run_scenario", "sample_descriptor", "sample_descriptors",
    "scenario_from_dict", "seed_stream", "start_pose", "summarize",
    "tour_actions", "vec_add", "vec_dist", "vec_neg", "vec_norm", "vec_sub",
    "wrap_angle", "__version__",
]
