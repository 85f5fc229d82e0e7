"""Similarity branch: embeddings, affinities and transition matrices"""

from .projection import Projection, default_projections, pool, project, standardize
from .transitions import (
    AffinityMatrix,
    TransitionMatrix,
    affinity,
    build_transitions,
    load_transition,
    row_softmax,
    save_transition,
    transition_row,
)

__all__ = [
    "AffinityMatrix",
    "Projection",
    "TransitionMatrix",
    "affinity",
    "build_transitions",
    "default_projections",
    "load_transition",
    "pool",
    "project",
    "row_softmax",
    "save_transition",
    "standardize",
    "transition_row",
]
