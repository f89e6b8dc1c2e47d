"""Neighbor subgraph construction for a target triple.

A one-degree neighbor of (e1, r, e2) is any triple whose tail is e1. The
subgraph holds neighbors up to ``max_depth`` degrees plus the target
itself, ordered deepest-first with the target last, together with the
binary adjacency matrix A where A[i, j] = 1 iff tail(N_j) = head(N_i)
and i != j. The target triple and its inverse are never admitted as
neighbors: either would let the prediction support itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from xkgat.errors import DataError
from xkgat.store import Triple, TripleStore


@dataclass
class NeighborSubgraph:
    triples: list[Triple]  # target last
    depth: list[int]  # 0 for the target, 1..max_depth for neighbors
    adjacency: np.ndarray  # (n, n) float64 in {0, 1}, zero diagonal

    @property
    def n(self) -> int:
        return len(self.triples)

    @property
    def target(self) -> Triple:
        return self.triples[-1]

    def row_degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)


def one_degree_neighbors(store: TripleStore, triple: Triple) -> list[Triple]:
    """Triples whose tail is the head of ``triple``, minus the triple and its inverse."""
    inverse = store.inverse_of(triple)
    return [
        t
        for t in store.by_tail.get(triple.head, [])
        if t != triple and t != inverse
    ]


def _capped(cands: list[Triple], cap: int, seed: int, head: int) -> list[Triple]:
    if len(cands) <= cap:
        return cands
    # keyed on (seed, head entity) so the same expansion samples identically
    # wherever it occurs
    rng = np.random.default_rng((seed, head))
    keep = sorted(rng.choice(len(cands), size=cap, replace=False).tolist())
    return [cands[i] for i in keep]


def build_subgraph(
    store: TripleStore,
    target: Triple,
    max_depth: int = 2,
    neighbor_cap: int = 1000,
    seed: int = 0,
    training: bool = False,
) -> NeighborSubgraph:
    """Breadth-first neighbor expansion around ``target``.

    Expansions with more than ``neighbor_cap`` candidates are sampled down
    to the cap deterministically. Triples reachable by several paths
    appear once, at their minimum depth. In training mode the target must
    be present in the store.
    """
    if max_depth < 1:
        raise DataError(f"max_depth must be >= 1, got {max_depth}")
    if neighbor_cap < 1:
        raise DataError(f"neighbor_cap must be >= 1, got {neighbor_cap}")
    if training and not store.contains(target):
        raise DataError(f"target triple {store.format_triple(target)} not in store")

    inverse = store.inverse_of(target)
    seen: dict[Triple, int] = {target: 0}
    collected: list[tuple[Triple, int]] = []
    frontier = [target]
    for depth in range(1, max_depth + 1):
        next_frontier: list[Triple] = []
        for src in frontier:
            cands = [
                t
                for t in store.by_tail.get(src.head, [])
                if t != target and t != inverse and t not in seen
            ]
            for t in _capped(cands, neighbor_cap, seed, src.head):
                seen[t] = depth
                collected.append((t, depth))
                next_frontier.append(t)
        frontier = next_frontier
        if not frontier:
            break

    # deepest neighbors first, stable within a depth, target last
    collected.sort(key=lambda td: -td[1])
    triples = [t for t, _ in collected] + [target]
    depths = [d for _, d in collected] + [0]

    n = len(triples)
    heads = np.array([t.head for t in triples])
    tails = np.array([t.tail for t in triples])
    adjacency = (tails[None, :] == heads[:, None]).astype(np.float64)
    np.fill_diagonal(adjacency, 0.0)
    return NeighborSubgraph(triples=triples, depth=depths, adjacency=adjacency)


def adjacency_row_degrees(subgraph: NeighborSubgraph) -> np.ndarray:
    """Per-row neighbor counts of the adjacency matrix."""
    return subgraph.adjacency.sum(axis=1)
