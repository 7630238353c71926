"""Seeded generator of unseen-scenario causal inference questions.

Random tiered DAGs, boolean structural models and invented node names are
combined into causal-path (CP), backdoor-adjustment (BA), factual (FI) and
counterfactual (CI) questions whose answers are computed exactly.
"""
from .graph import (
    ComplexityStats,
    GraphShape,
    JunctionProbabilities,
    TieredDag,
    complexity_stats,
    generate_graph,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .naming import NameStyle, TermLexicon, assign_names
from .oracles import (
    AdjustmentGroundTruth,
    Path,
    enumerate_backdoor_paths,
    enumerate_causal_paths,
    enumerate_minimal_adjustment_sets,
    is_path_blocked,
    is_valid_adjustment_set,
)
from .questions import QuestionRecord, TaskKind
from .scm import BoolScm, evaluate_counterfactual, evaluate_factual, generate_functions

__version__ = "0.1.0"
