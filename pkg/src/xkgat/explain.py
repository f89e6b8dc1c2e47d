"""Attention-chain explanations for a prediction.

An explanation for target (h, r, t) is an adjacency-realized chain of
subgraph triples ending at a triple whose tail is h, scored by the layer
weight of its length times the product of the chained attention weights.
Chains through zero-attention (fallback) rows cannot occur: adjacency
realization implies every visited row has at least one neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from xkgat.errors import DataError
from xkgat.model import ModelConfig, Parameters, forward
from xkgat.store import Triple, TripleStore, canonicalize
from xkgat.subgraph import NeighborSubgraph, build_subgraph


@dataclass
class Explanation:
    path: tuple[Triple, ...]  # chain in subgraph direction; tail of last = target head
    target: Triple
    length: int
    alpha: float
    closed: bool  # first head equals the target tail

    def surface_path(self, store: TripleStore) -> tuple[Triple, ...]:
        return tuple(canonicalize(t, store) for t in self.path)

    def sort_key(self) -> tuple:
        ids = tuple((t.head, t.relation, t.tail) for t in self.path)
        return (-self.alpha, self.length, ids)


@dataclass
class ExplanationReport:
    recall: float
    avg_support: Optional[float]
    k: int
    n_test: int


def enumerate_explanations(
    subgraph: NeighborSubgraph, trace, config: ModelConfig
) -> list[Explanation]:
    """All candidate explanations with their confidence scores."""
    n = subgraph.n
    if trace.attention and trace.attention[0].shape[0] != n:
        raise DataError("forward trace does not match the subgraph")
    target = subgraph.target
    A = subgraph.adjacency
    preds = [np.flatnonzero(A[i] > 0) for i in range(n)]
    out: list[Explanation] = []
    for length in range(1, config.layers + 1):
        # chains (p_1 .. p_length) with A[n-1, p_length] = 1 and
        # A[p_{i+1}, p_i] = 1; built backward from the target
        stack: list[list[int]] = [[int(p)] for p in preds[n - 1]]
        while stack:
            chain = stack.pop()
            if len(chain) == length:
                # chain is [p_length, .., p_1]; attention factors walk forward
                path = chain[::-1]
                alpha = config.omega[length - 1]
                for i in range(length - 1):
                    alpha *= trace.attention[i][path[i + 1], path[i]]
                alpha *= trace.attention[length - 1][n - 1, path[-1]]
                triples = tuple(subgraph.triples[p] for p in path)
                out.append(
                    Explanation(
                        path=triples,
                        target=target,
                        length=length,
                        alpha=float(alpha),
                        closed=triples[0].head == target.tail,
                    )
                )
            else:
                for p in preds[chain[-1]]:
                    stack.append(chain + [int(p)])
    return out


def top_k_explanations(candidates: list[Explanation], k: int) -> list[Explanation]:
    """Highest-confidence explanations; ties prefer shorter, then lower ids."""
    if k < 1:
        raise DataError("k must be >= 1")
    return sorted(candidates, key=Explanation.sort_key)[:k]


def count_supports(explanation: Explanation, store: TripleStore) -> int:
    """Groundings of the generalized rule present in the store, excluding the
    explanation's own entity binding."""
    from xkgat.rules import explanation_to_rule, enumerate_groundings, rule_binding_of_explanation

    rule = explanation_to_rule(explanation, store)
    own = rule_binding_of_explanation(rule, explanation, store)
    count = 0
    for binding in enumerate_groundings(rule, store):
        if binding != own:
            count += 1
    return count


def explain_target(
    target: Triple,
    params: Parameters,
    store: TripleStore,
    config: ModelConfig,
    k: int,
    seed: int = 0,
) -> list[Explanation]:
    """Top-k explanations for one target triple."""
    sub = build_subgraph(store, target, config.max_depth, config.neighbor_cap, seed)
    trace = forward(sub, params, config)
    return top_k_explanations(enumerate_explanations(sub, trace, config), k)


def explanation_report(
    test_triples: list[Triple],
    params: Parameters,
    store: TripleStore,
    config: ModelConfig,
    k: int = 3,
    seed: int = 0,
) -> ExplanationReport:
    """Recall and average summed support of valid top-k explanations."""
    if not test_triples:
        raise DataError("empty test set")
    if k < 1:
        raise DataError("k must be >= 1")
    n_valid = 0
    support_totals: list[int] = []
    for target in test_triples:
        top = explain_target(target, params, store, config, k, seed)
        supports = [count_supports(e, store) for e in top]
        valid = [s for s in supports if s >= 1]
        if valid:
            n_valid += 1
            support_totals.append(sum(valid))
    recall = n_valid / len(test_triples)
    avg = float(np.mean(support_totals)) if support_totals else None
    return ExplanationReport(recall=recall, avg_support=avg, k=k, n_test=len(test_triples))


def transe_explanations(
    test_triple: Triple,
    transe_params: Parameters,
    store: TripleStore,
    k: int = 3,
    norm: str = "L1",
    seed: int = 0,
) -> list[Explanation]:
    """Length-1 explanations from raw translation embeddings via the same
    masked-softmax similarity (one layer, depth-1 subgraph)."""
    config = ModelConfig(d=transe_params.d, layers=1, omega=(1.0,), norm=norm, max_depth=1)
    return explain_target(test_triple, transe_params, store, config, k, seed)


def write_explanations(
    path: str,
    records: list[tuple[Triple, list[tuple[Explanation, int]]]],
    store: TripleStore,
) -> None:
    """One line per explanation: target, path (surface form), length, alpha, support."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("target\tpath\tlength\talpha\tsupport\n")
        for target, explanations in records:
            for expl, support in explanations:
                path_txt = ";".join(store.format_triple(t) for t in expl.surface_path(store))
                fh.write(
                    f"{store.format_triple(target)}\t{path_txt}\t{expl.length}\t{expl.alpha:.10g}\t{support}\n"
                )


def parse_triple_text(text: str, store: TripleStore) -> Triple:
    """Parse ``(head, relation, tail)`` surface form back into ids."""
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise DataError(f"malformed triple text: {text!r}")
    parts = [p.strip() for p in text[1:-1].split(", ")]
    if len(parts) != 3:
        raise DataError(f"malformed triple text: {text!r}")
    h, r, t = parts
    if h not in store.entity_ids or t not in store.entity_ids or r not in store.relation_ids:
        raise DataError(f"triple text references unknown names: {text!r}")
    return Triple(store.entity_ids[h], store.relation_ids[r], store.entity_ids[t])


def _decanonicalize_path(
    surface: tuple[Triple, ...], target: Triple, store: TripleStore
) -> tuple[Triple, ...]:
    """Re-orient surface-form path triples so the chain constraint holds."""
    internal: list[Triple] = []
    required = target.head
    for t in reversed(surface):
        if t.tail == required:
            chosen = t
        else:
            inv = store.inverse_of(t)
            if inv is None or inv.tail != required:
                raise DataError("explanation path does not chain to the target head")
            chosen = inv
        internal.append(chosen)
        required = chosen.head
    return tuple(reversed(internal))


def read_explanations(path: str, store: TripleStore) -> list[tuple[Triple, list[tuple[Explanation, int]]]]:
    """Inverse of write_explanations; paths are re-oriented into chain form."""
    by_target: dict[Triple, list[tuple[Explanation, int]]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("target\t"):
            raise DataError(f"{path}: missing explanation header")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise DataError(f"{path}:{lineno}: expected 5 fields")
            target = parse_triple_text(parts[0], store)
            surface = tuple(parse_triple_text(p, store) for p in parts[1].split(";"))
            chain = _decanonicalize_path(surface, target, store)
            expl = Explanation(
                path=chain,
                target=target,
                length=int(parts[2]),
                alpha=float(parts[3]),
                closed=chain[0].head == target.tail,
            )
            by_target.setdefault(target, []).append((expl, int(parts[4])))
    return list(by_target.items())
