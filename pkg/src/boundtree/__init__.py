"""Counting and constructing degree-bounded spanning trees of dense graphs."""

from .constructions import (
    ConstantsTable,
    TightConstruction,
    bipartite_counterexample,
    constants,
    no_bounded_tree_certificate,
    theorem_bound,
    tight_regular_construction,
)
from .counting import (
    count_bounded,
    count_by_max_degree,
    count_spanning_trees,
    enumerate_spanning_trees,
    is_spanning_tree,
)
from .forest import BoundedForest, orientation_to_pruned_forest
from .graph import Graph, GraphError, build_graph, random_regular, read_edge_list, write_edge_list
from .montecarlo import component_expectation_check, estimate_P, exact_P, wilson_interval
from .nibble import StageForest, check_successful, final_stage_goodness, nibble_step, q_sequence, run_nibble
from .orientation import (
    Orientation,
    StagePlan,
    classify,
    delete_excess_in_edges,
    k_stage_sample,
    removal_cost_Q,
    removable_edges,
    sample_orientation,
)
from .repair import (
    PreconditionError,
    RepairError,
    RepairReport,
    extend_forest_once,
    generate_many,
    pipeline_generate,
    repair_to_spanning_tree,
)

__version__ = "0.1.0"

__all__ = [
    "BoundedForest", "ConstantsTable", "Graph", "GraphError", "Orientation", "PreconditionError",
    "RepairError", "RepairReport", "StageForest", "StagePlan", "TightConstruction",
    "bipartite_counterexample", "build_graph", "check_successful", "classify", "component_expectation_check",
    "constants", "count_bounded", "count_by_max_degree", "count_spanning_trees", "delete_excess_in_edges",
    "enumerate_spanning_trees", "estimate_P", "exact_P", "extend_forest_once", "final_stage_goodness",
    "generate_many", "is_spanning_tree", "k_stage_sample", "nibble_step", "no_bounded_tree_certificate",
    "orientation_to_pruned_forest", "pipeline_generate", "q_sequence", "random_regular", "read_edge_list",
    "removable_edges", "removal_cost_Q", "repair_to_spanning_tree", "run_nibble", "sample_orientation",
    "theorem_bound", "tight_regular_construction", "wilson_interval", "write_edge_list",
]
