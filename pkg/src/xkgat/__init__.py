"""Explainable knowledge-graph attention toolkit.

Trains an attention model over triple neighborhoods, predicts missing
links for a set of target relations, extracts attention-chain
explanations for each prediction, generalizes them into rules, and
serves predicted triples to human reviewers.
"""

from xkgat.store import Triple, TripleStore, Split, load_triples, augment_inverses, split_dataset, canonicalize
from xkgat.subgraph import NeighborSubgraph, one_degree_neighbors, build_subgraph
from xkgat.model import Parameters, ModelConfig, ForwardTrace, init_params, forward, score, margin_loss, transe_score

__all__ = [
    "Triple",
    "TripleStore",
    "Split",
    "load_triples",
    "augment_inverses",
    "split_dataset",
    "canonicalize",
    "NeighborSubgraph",
    "one_degree_neighbors",
    "build_subgraph",
    "Parameters",
    "ModelConfig",
    "ForwardTrace",
    "init_params",
    "forward",
    "score",
    "margin_loss",
    "transe_score",
]
