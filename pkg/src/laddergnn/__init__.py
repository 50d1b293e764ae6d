"""Hop-aware node classification with per-hop dimension ladders.

Per-hop feature propagation with unequal, geometrically decaying embedding
dimensions, a linear-before-softmax classifier trained with hand-derived
gradients, graph homophily analysis, and a progressive reinforcement-learning
search over hop-dimension combinations.
"""

__version__ = "0.1.0"

from .graph import (
    CsrMatrix,
    HomophilyReport,
    build_binary_adjacency,
    build_normalized_adjacency,
    hop_k_neighbors,
    node_homophily,
    propagate,
    spmm,
)
from .model import (
    HopDimProfile,
    LadderModel,
    evaluate_by_homophily,
    forward,
    forward_addition_variant,
    init_model,
    loss_and_gradients,
    make_profile,
    profile_from_dims,
)
from .train import Metrics, TrainConfig, train

__all__ = [
    "CsrMatrix",
    "HomophilyReport",
    "HopDimProfile",
    "LadderModel",
    "Metrics",
    "TrainConfig",
    "build_binary_adjacency",
    "build_normalized_adjacency",
    "evaluate_by_homophily",
    "forward",
    "forward_addition_variant",
    "hop_k_neighbors",
    "init_model",
    "loss_and_gradients",
    "make_profile",
    "node_homophily",
    "profile_from_dims",
    "propagate",
    "spmm",
    "train",
]
