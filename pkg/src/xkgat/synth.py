"""Synthetic knowledge graphs with planted rules, for end-to-end testing.

Each planted rule is either an association rule (X, r_head, c) <=
(X, r_body, c') or a path rule (X, r_head, Y) <= (X, r_body, Y). Every
chosen subject receives the head triple; with probability equal to the
configured confidence it also receives the matching body triple, so the
brute-force head coverage of the planted rule on the emitted KG matches
the confidence. Noise triples use relations that never appear as a rule
head.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from xkgat.errors import DataError
from xkgat.rules import Atom, Rule, const, var
from xkgat.store import TripleStore


@dataclass
class PlantedRule:
    kind: str  # "association" | "path"
    head_relation: str
    body_relation: str
    subjects: int = 100
    confidence: float = 1.0
    head_constant: Optional[str] = None  # association only; auto-named when None
    body_constant: Optional[str] = None


def generate_synthetic(
    n_entities: int,
    n_relations: int,
    planted_rules: list[PlantedRule],
    noise_triples: int = 0,
    seed: int = 0,
) -> tuple[TripleStore, list[Rule]]:
    """Emit a KG realizing the planted rules plus uniform noise; returns the
    store and the ground-truth rules in miner form."""
    if n_entities < 1 or n_relations < 1:
        raise DataError("entity and relation counts must be positive")
    relation_names = [f"rel{i}" for i in range(n_relations)]
    known = set(relation_names)
    for pr in planted_rules:
        if pr.head_relation not in known or pr.body_relation not in known:
            raise DataError(
                f"planted rule references undeclared relation: {pr.head_relation}/{pr.body_relation}"
            )
        if pr.kind not in ("association", "path"):
            raise DataError(f"unknown planted rule kind {pr.kind!r}")
        if not 0 < pr.confidence <= 1:
            raise DataError("planted confidence must be in (0, 1]")
        if pr.subjects < 1:
            raise DataError("planted rule needs at least one subject")
    signatures = set()
    for pr in planted_rules:
        sig = (pr.kind, pr.head_relation, pr.body_relation, pr.head_constant, pr.body_constant)
        if sig in signatures:
            raise DataError(f"contradictory plant: duplicate rule signature {sig}")
        signatures.add(sig)

    rng = np.random.default_rng(seed)
    store = TripleStore()
    # entity layout: subjects first, then a shared value pool, then per-rule constants
    n_subjects = max(1, n_entities // 2)
    subject_names = [f"item{i}" for i in range(n_subjects)]
    value_names = [f"val{i}" for i in range(max(1, n_entities - n_subjects))]
    for name in subject_names:
        store.intern_entity(name)
    for name in value_names:
        store.intern_entity(name)
    for name in relation_names:
        store.intern_relation(name)

    truth: list[Rule] = []
    for idx, pr in enumerate(planted_rules):
        if pr.subjects > n_subjects:
            raise DataError(f"rule {idx} wants {pr.subjects} subjects, only {n_subjects} exist")
        chosen = rng.choice(n_subjects, size=pr.subjects, replace=False)
        r_head = store.relation_ids[pr.head_relation]
        r_body = store.relation_ids[pr.body_relation]
        if pr.kind == "association":
            head_c = store.intern_entity(pr.head_constant or f"headval{idx}")
            body_c = store.intern_entity(pr.body_constant or f"bodyval{idx}")
            for s in chosen.tolist():
                name = subject_names[s]
                store.add_named(name, pr.head_relation, store.entity_names[head_c])
                if rng.random() < pr.confidence:
                    store.add_named(name, pr.body_relation, store.entity_names[body_c])
            truth.append(
                Rule(
                    head=Atom(var(1), r_head, const(head_c)),
                    body=(Atom(var(1), r_body, const(body_c)),),
                    kind="association",
                ).normalized()
            )
        else:
            for s in chosen.tolist():
                name = subject_names[s]
                value = value_names[int(rng.integers(0, len(value_names)))]
                store.add_named(name, pr.head_relation, value)
                if rng.random() < pr.confidence:
                    store.add_named(name, pr.body_relation, value)
            truth.append(
                Rule(
                    head=Atom(var(1), r_head, var(2)),
                    body=(Atom(var(1), r_body, var(2)),),
                    kind="path",
                ).normalized()
            )

    head_relations = {pr.head_relation for pr in planted_rules}
    noise_pool = [r for r in relation_names if r not in head_relations]
    if noise_triples > 0 and not noise_pool:
        raise DataError("no non-head relation available for noise triples")
    added = 0
    attempts = 0
    while added < noise_triples:
        attempts += 1
        if attempts > 50 * noise_triples + 100:
            raise DataError("could not place the requested noise triples")
        subj = subject_names[int(rng.integers(0, n_subjects))]
        rel = noise_pool[int(rng.integers(0, len(noise_pool)))]
        obj = value_names[int(rng.integers(0, len(value_names)))]
        if store.add_named(subj, rel, obj):
            added += 1
    return store, truth
