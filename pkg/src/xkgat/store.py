"""Triple store: interning, indexing, inverse augmentation, dataset splits.

Entities and relations are interned to dense integer ids in first-seen
order so that runs are reproducible from the same input file. Triples are
kept as an ordered, duplicate-free list with head/tail/(head, relation)
indexes that stay exactly consistent with the triple list. Inverse
augmentation appends one reversed relation per input relation; inverse
surface names use the reserved ``~inv`` suffix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from xkgat.errors import DataError, ParseError

INVERSE_SUFFIX = "~inv"


@dataclass(frozen=True)
class Triple:
    head: int
    relation: int
    tail: int


@dataclass
class RelationInfo:
    canonical: int
    inverse: Optional[int]
    is_inverse: bool
    name: str


class TripleStore:
    """Immutable-after-construction set of triples with indexes."""

    def __init__(self):
        self.entity_names: list[str] = []
        self.entity_ids: dict[str, int] = {}
        self.relation_names: list[str] = []
        self.relation_ids: dict[str, int] = {}
        self.relation_info: list[RelationInfo] = []
        self.triples: list[Triple] = []
        self.triple_set: set[Triple] = set()
        self.by_head: dict[int, list[Triple]] = {}
        self.by_tail: dict[int, list[Triple]] = {}
        self.by_relation: dict[int, list[Triple]] = {}
        self.by_head_relation: dict[tuple[int, int], list[int]] = {}

    # -- interning ---------------------------------------------------------

    def intern_entity(self, name: str) -> int:
        eid = self.entity_ids.get(name)
        if eid is None:
            eid = len(self.entity_names)
            self.entity_ids[name] = eid
            self.entity_names.append(name)
        return eid

    def intern_relation(self, name: str) -> int:
        rid = self.relation_ids.get(name)
        if rid is None:
            rid = len(self.relation_names)
            self.relation_ids[name] = rid
            self.relation_names.append(name)
            self.relation_info.append(
                RelationInfo(canonical=rid, inverse=None, is_inverse=False, name=name)
            )
        return rid

    def add(self, triple: Triple) -> bool:
        """Add a triple if absent; returns True when newly inserted."""
        if triple in self.triple_set:
            return False
        self.triple_set.add(triple)
        self.triples.append(triple)
        self.by_head.setdefault(triple.head, []).append(triple)
        self.by_tail.setdefault(triple.tail, []).append(triple)
        self.by_relation.setdefault(triple.relation, []).append(triple)
        self.by_head_relation.setdefault((triple.head, triple.relation), []).append(triple.tail)
        return True

    def add_named(self, head: str, relation: str, tail: str) -> bool:
        return self.add(
            Triple(self.intern_entity(head), self.intern_relation(relation), self.intern_entity(tail))
        )

    # -- accessors ---------------------------------------------------------

    @property
    def n_entities(self) -> int:
        return len(self.entity_names)

    @property
    def n_relations(self) -> int:
        return len(self.relation_names)

    @property
    def n_canonical_relations(self) -> int:
        return sum(1 for info in self.relation_info if not info.is_inverse)

    @property
    def augmented(self) -> bool:
        return any(info.is_inverse for info in self.relation_info)

    def contains(self, triple: Triple) -> bool:
        return triple in self.triple_set

    def inverse_of(self, triple: Triple) -> Optional[Triple]:
        """The reversed triple under the inverse-relation pairing, if any."""
        inv = self.relation_info[triple.relation].inverse
        if inv is None:
            return None
        return Triple(triple.tail, inv, triple.head)

    def triple_names(self, triple: Triple) -> tuple[str, str, str]:
        return (
            self.entity_names[triple.head],
            self.relation_names[triple.relation],
            self.entity_names[triple.tail],
        )

    def format_triple(self, triple: Triple) -> str:
        h, r, t = self.triple_names(triple)
        return f"({h}, {r}, {t})"


def load_triples(path: str, format: str = "tsv") -> TripleStore:
    """Load a UTF-8 TSV triple file, one ``head<TAB>relation<TAB>tail`` per line."""
    if format != "tsv":
        raise DataError(f"unsupported triple format: {format}")
    store = TripleStore()
    n_lines = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            n_lines += 1
            parts = line.split("\t")
            if len(parts) != 3 or any(p == "" for p in parts):
                raise ParseError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}")
            head, relation, tail = parts
            if relation.endswith(INVERSE_SUFFIX):
                raise ParseError(
                    f"{path}:{lineno}: relation name {relation!r} uses the reserved {INVERSE_SUFFIX!r} suffix"
                )
            store.add_named(head, relation, tail)
    if n_lines == 0:
        raise ParseError(f"{path}: empty triple file")
    return store


def augment_inverses(store: TripleStore) -> TripleStore:
    """Return a new store where every (h, r, t) also appears as (t, r~inv, h)."""
    if store.augmented:
        raise DataError("store already contains inverse relations; refusing double augmentation")
    out = TripleStore()
    out.entity_names = list(store.entity_names)
    out.entity_ids = dict(store.entity_ids)
    n_rel = store.n_relations
    for rid, name in enumerate(store.relation_names):
        out.relation_names.append(name)
        out.relation_ids[name] = rid
        out.relation_info.append(
            RelationInfo(canonical=rid, inverse=rid + n_rel, is_inverse=False, name=name)
        )
    for rid, name in enumerate(store.relation_names):
        inv_name = name + INVERSE_SUFFIX
        inv_id = rid + n_rel
        out.relation_names.append(inv_name)
        out.relation_ids[inv_name] = inv_id
        out.relation_info.append(
            RelationInfo(canonical=rid, inverse=rid, is_inverse=True, name=inv_name)
        )
    for triple in store.triples:
        out.add(triple)
        out.add(Triple(triple.tail, triple.relation + n_rel, triple.head))
    return out


def canonicalize(triple: Triple, store: TripleStore) -> Triple:
    """Unroll an inverse-relation triple into its canonical surface direction."""
    info = store.relation_info[triple.relation]
    if info.is_inverse:
        return Triple(triple.tail, info.canonical, triple.head)
    return triple


@dataclass
class Split:
    train: TripleStore
    valid: list[Triple]
    test: list[Triple]
    target_relations: set[int]


def _subset_store(store: TripleStore, triples: Iterable[Triple]) -> TripleStore:
    out = TripleStore()
    out.entity_names = list(store.entity_names)
    out.entity_ids = dict(store.entity_ids)
    out.relation_names = list(store.relation_names)
    out.relation_ids = dict(store.relation_ids)
    out.relation_info = [
        RelationInfo(i.canonical, i.inverse, i.is_inverse, i.name) for i in store.relation_info
    ]
    for t in triples:
        out.add(t)
    return out


def split_dataset(
    store: TripleStore,
    target_relations: set[int],
    test_fraction: float,
    valid_fraction: float = 0.05,
    seed: int = 0,
    regime: str = "all",
) -> Split:
    """Carve test/valid sets out of the target-relation triples.

    ``regime='all'`` keeps every non-test triple in train; ``regime='part'``
    keeps only the remaining target-relation triples. Sampling is
    per-relation and deterministic under ``seed``.
    """
    if not 0 < test_fraction < 1:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if regime not in ("all", "part"):
        raise DataError(f"unknown regime {regime!r}")
    unknown = target_relations - set(range(store.n_relations))
    if unknown:
        raise DataError(f"target relations not in store: {sorted(unknown)}")

    test: list[Triple] = []
    valid: list[Triple] = []
    train_target: list[Triple] = []
    for rid in sorted(target_relations):
        rel_triples = list(store.by_relation.get(rid, []))
        if len(rel_triples) < 2:
            raise DataError(
                f"target relation {store.relation_names[rid]!r} has {len(rel_triples)} triples, cannot split"
            )
        rng = np.random.default_rng((seed, rid))
        order = rng.permutation(len(rel_triples))
        n_test = max(1, round(test_fraction * len(rel_triples)))
        if n_test >= len(rel_triples):
            n_test = len(rel_triples) - 1
        test_idx = set(order[:n_test].tolist())
        remaining = [rel_triples[i] for i in order[n_test:].tolist()]
        n_valid = int(round(valid_fraction * len(remaining))) if valid_fraction > 0 else 0
        valid.extend(remaining[:n_valid])
        train_target.extend(remaining[n_valid:])
        test.extend(rel_triples[i] for i in sorted(test_idx))

    if regime == "all":
        removed = set(test) | set(valid)
        train_triples = [t for t in store.triples if t not in removed]
    else:
        train_triples = list(train_target)
    return Split(
        train=_subset_store(store, train_triples),
        valid=valid,
        test=test,
        target_relations=set(target_relations),
    )


def write_triples(path: str, store_or_triples, store: Optional[TripleStore] = None) -> None:
    """Write triples to TSV using surface names; accepts a store or (triples, store)."""
    if isinstance(store_or_triples, TripleStore):
        triples: Sequence[Triple] = store_or_triples.triples
        names = store_or_triples
    else:
        triples = store_or_triples
        if store is None:
            raise DataError("a TripleStore is required to resolve surface names")
        names = store
    with open(path, "w", encoding="utf-8") as fh:
        for t in triples:
            h, r, tl = names.triple_names(t)
            fh.write(f"{h}\t{r}\t{tl}\n")
