"""Worked examples: survival recurrence, random trees, thresholds, relations."""

from .maps import (
    edge_position,
    evenodd_cauchy,
    evenodd_split,
    identity_map,
    threshold_map,
    threshold_stage,
    threshold_total,
    tree_horizon,
    tree_pruning_map,
)
from .relations import domination_relation, paths_relation
from .survival import iterate_map, survival_prob, survival_sequence
from .trees import (
    Interval,
    TreeShape,
    tree_code_measure,
    tree_dist_direct,
    tree_dist_percolation,
    tree_dist_percolation_bracket,
    vertex,
    vertex_index,
)

__all__ = [
    "Interval",
    "TreeShape",
    "domination_relation",
    "edge_position",
    "evenodd_cauchy",
    "evenodd_split",
    "identity_map",
    "iterate_map",
    "paths_relation",
    "survival_prob",
    "survival_sequence",
    "threshold_map",
    "threshold_stage",
    "threshold_total",
    "tree_code_measure",
    "tree_dist_direct",
    "tree_dist_percolation",
    "tree_dist_percolation_bracket",
    "tree_horizon",
    "tree_pruning_map",
    "vertex",
    "vertex_index",
]
