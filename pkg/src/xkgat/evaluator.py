"""Ranking evaluation for partial link prediction.

For a test triple (h, r, t) every entity e is scored as a candidate tail
of (h, r, e) with the full attention forward pass and the true tail's
ascending-score rank is reported, raw and filtered. Ties rank the true
triple last (pessimistic). Candidate scoring is batched: the neighbor
side of the subgraph does not depend on the candidate tail, so only the
target row is recomputed per candidate; the few candidates that could
change the subgraph itself (tails whose entity heads a subgraph triple,
sits in an inverse of (h, r, .), or equals h) go through the exact
per-candidate forward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from xkgat.errors import DataError
from xkgat.model import ModelConfig, Parameters, forward, transe_score
from xkgat.store import Split, Triple, TripleStore
from xkgat.subgraph import build_subgraph


@dataclass
class RankResult:
    triple: Triple
    raw_rank: int
    filtered_rank: int


@dataclass
class MetricReport:
    mrr: float
    hits: dict[int, float]
    n_test: int
    setting: str


HIT_KS = (1, 3, 5, 10)


def _batched_candidate_scores(
    store: TripleStore, params: Parameters, config: ModelConfig, head: int, relation: int, seed: int
) -> np.ndarray:
    """Scores for (head, relation, e) over all entities e, assuming none of
    the candidates perturbs the subgraph structure."""
    # tail sentinel -1: matches no stored triple, so no leakage exclusion and
    # an all-zero target adjacency column, which is what every structurally
    # generic candidate sees
    sub = build_subgraph(store, Triple(head, relation, -1), config.max_depth, config.neighbor_cap, seed)
    n = sub.n
    r_vec = params.relation_vec(relation)
    E = params.entities
    if n == 1:
        s_h = np.zeros(params.d)
        for w in config.omega:
            s_h = s_h + w * E[head]
        residual = s_h[None, :] + r_vec[None, :] - E
    else:
        nb = sub.triples[:-1]
        A_nb = sub.adjacency[: n - 1, : n - 1]
        H_nb = E[[t.head for t in nb]]
        R_nb = np.stack([params.relation_vec(t.relation) for t in nb])
        T_nb = E[[t.tail for t in nb]]
        Sh_nb = T_nb - R_nb
        deg_nb = A_nb.sum(axis=1)
        support_nb = A_nb > 0

        target_sup = sub.adjacency[n - 1, : n - 1] > 0
        Sh_target = E - r_vec[None, :]  # (B, d), per candidate tail

        current = H_nb
        s_h = np.zeros((E.shape[0], params.d))
        target_fallback_repr = E[head]
        for k in range(config.layers):
            St = current + R_nb
            # neighbor-side layer
            C = Sh_nb @ St.T
            Cn = np.zeros_like(C)
            for i in range(n - 1):
                supi = support_nb[i]
                if not supi.any():
                    continue
                vals = np.exp(C[i, supi] - C[i, supi].max())
                Cn[i, supi] = vals / vals.sum()
            S_plus = Cn @ St
            S_plus[deg_nb == 0] = current[deg_nb == 0]
            # target row, batched over candidates
            if target_sup.any():
                St_sup = St[target_sup]
                logits = Sh_target @ St_sup.T
                logits -= logits.max(axis=1, keepdims=True)
                weights = np.exp(logits)
                weights /= weights.sum(axis=1, keepdims=True)
                target_repr = weights @ St_sup
            else:
                target_repr = np.broadcast_to(target_fallback_repr, (E.shape[0], params.d))
            s_h = s_h + config.omega[k] * target_repr
            current = S_plus
        residual = s_h + r_vec[None, :] - E
    if config.norm == "L1":
        return np.abs(residual).sum(axis=1)
    return np.sqrt((residual**2).sum(axis=1))


def _special_candidates(store: TripleStore, head: int, relation: int, config: ModelConfig, seed: int) -> set[int]:
    sub = build_subgraph(store, Triple(head, relation, -1), config.max_depth, config.neighbor_cap, seed)
    special = {head}
    special.update(t.head for t in sub.triples[:-1])
    inv = store.relation_info[relation].inverse
    if inv is not None:
        # candidates e with (e, r~inv, head) stored: their subgraph drops that triple
        for t in store.by_tail.get(head, []):
            if t.relation == inv:
                special.add(t.head)
    special.update(store.by_head_relation.get((head, relation), []))
    return special


def candidate_tail_scores(
    test_triple: Triple,
    params: Parameters,
    config: ModelConfig,
    store: TripleStore,
    seed: int = 0,
    transe: bool = False,
) -> np.ndarray:
    """Model score of (h, r, e) for every entity e."""
    h, r = test_triple.head, test_triple.relation
    if transe:
        residual = params.entities[h] + params.relation_vec(r) - params.entities
        if config.norm == "L1":
            return np.abs(residual).sum(axis=1)
        return np.sqrt((residual**2).sum(axis=1))
    scores = _batched_candidate_scores(store, params, config, h, r, seed)
    exact = _special_candidates(store, h, r, config, seed)
    exact.add(test_triple.tail)
    for e in exact:
        sub = build_subgraph(store, Triple(h, r, e), config.max_depth, config.neighbor_cap, seed)
        scores[e] = forward(sub, params, config).score
    return scores


def rank_tail(
    test_triple: Triple,
    params: Parameters,
    model_config: ModelConfig,
    store: TripleStore,
    filter_set: set[Triple],
    seed: int = 0,
    transe: bool = False,
) -> RankResult:
    """Ascending-score rank of the true tail among all entity candidates."""
    scores = candidate_tail_scores(test_triple, params, model_config, store, seed=seed, transe=transe)
    t = test_triple.tail
    s_true = scores[t]
    better = scores < s_true
    equal = scores == s_true
    better[t] = False
    equal[t] = False
    raw_rank = 1 + int(better.sum()) + int(equal.sum())
    if filter_set:
        keep = np.ones(len(scores), dtype=bool)
        for e in range(len(scores)):
            if e != t and Triple(test_triple.head, test_triple.relation, e) in filter_set:
                keep[e] = False
        filtered_rank = 1 + int((better & keep).sum()) + int((equal & keep).sum())
    else:
        filtered_rank = raw_rank
    return RankResult(triple=test_triple, raw_rank=raw_rank, filtered_rank=filtered_rank)


def compute_metrics(ranks: list[RankResult], setting: str = "filter") -> MetricReport:
    """MRR and Hit@k from per-triple ranks."""
    if not ranks:
        raise DataError("cannot compute metrics over an empty rank list")
    if setting not in ("raw", "filter"):
        raise DataError(f"unknown setting {setting!r}")
    values = [r.raw_rank if setting == "raw" else r.filtered_rank for r in ranks]
    mrr = float(np.mean([1.0 / v for v in values]))
    hits = {k: float(np.mean([v <= k for v in values])) for k in HIT_KS}
    return MetricReport(mrr=mrr, hits=hits, n_test=len(ranks), setting=setting)


def run_plp(
    split: Split,
    params: Parameters,
    model_config: ModelConfig,
    seed: int = 0,
    transe: bool = False,
) -> dict[str, MetricReport]:
    """Evaluate the test set; filter set is train + valid + test."""
    bad = [t for t in split.test if t.relation not in split.target_relations]
    if bad:
        raise DataError("test set contains non-target relations")
    if params.d != model_config.d:
        raise DataError("checkpoint dimension does not match the model config")
    filter_set = set(split.train.triple_set) | set(split.valid) | set(split.test)
    ranks = [
        rank_tail(t, params, model_config, split.train, filter_set, seed=seed, transe=transe)
        for t in split.test
    ]
    return {
        "raw": compute_metrics(ranks, "raw"),
        "filter": compute_metrics(ranks, "filter"),
    }


def write_report(path: str, reports: dict[str, MetricReport]) -> None:
    """Structured text: one (setting, metric, value) line per entry."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("setting\tmetric\tvalue\n")
        for setting in ("raw", "filter"):
            rep = reports[setting]
            fh.write(f"{setting}\tmrr\t{rep.mrr:.6f}\n")
            for k in HIT_KS:
                fh.write(f"{setting}\thit@{k}\t{rep.hits[k]:.6f}\n")
            fh.write(f"{setting}\tn_test\t{rep.n_test}\n")
