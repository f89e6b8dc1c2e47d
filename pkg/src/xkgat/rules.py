"""Rule generalization, quality statistics, and forward application.

Explanations generalize into rules by replacing chain-link entities with
variables: the entity shared between consecutive body triples (and
between the last body triple and the target head) becomes a variable. A
closed explanation, whose first head equals the target tail, also joins
its two endpoints into one variable (path rule); otherwise the endpoints
stay constant (association rule). Atoms are rendered in canonical
relation direction and variables are renumbered by first occurrence, so
structural equality is invariant under variable renaming.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from xkgat.errors import DataError
from xkgat.store import Triple, TripleStore


@dataclass(frozen=True)
class Term:
    kind: str  # "variable" | "constant"
    id: int  # variable index (1-based) or entity id

    @property
    def is_variable(self) -> bool:
        return self.kind == "variable"


def var(i: int) -> Term:
    return Term("variable", i)


def const(entity: int) -> Term:
    return Term("constant", entity)


@dataclass(frozen=True)
class Atom:
    subject: Term
    relation: int
    object: Term


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[Atom, ...]
    kind: str  # "association" | "path"

    def normalized(self) -> "Rule":
        return self.normalized_with_mapping()[0]

    def normalized_with_mapping(self) -> tuple["Rule", dict[int, int]]:
        """Rename variables densely by first occurrence across head then body;
        also returns the old-id -> new-id mapping."""
        mapping: dict[int, int] = {}

        def remap(term: Term) -> Term:
            if not term.is_variable:
                return term
            if term.id not in mapping:
                mapping[term.id] = len(mapping) + 1
            return var(mapping[term.id])

        atoms = [self.head] + list(self.body)
        out = [Atom(remap(a.subject), a.relation, remap(a.object)) for a in atoms]
        return Rule(head=out[0], body=tuple(out[1:]), kind=self.kind), mapping

    def variables(self) -> set[int]:
        out = set()
        for a in (self.head, *self.body):
            for t in (a.subject, a.object):
                if t.is_variable:
                    out.add(t.id)
        return out


@dataclass
class RuleStats:
    generation_count: int = 0
    hc: float = 0.0
    support: int = 0
    inferred: int = 0


def _check_connected(rule: Rule) -> None:
    counts: dict[int, int] = {}
    for a in (rule.head, *rule.body):
        for t in (a.subject, a.object):
            if t.is_variable:
                counts[t.id] = counts.get(t.id, 0) + 1
    lonely = [v for v, c in counts.items() if c < 2]
    if lonely:
        raise DataError(f"rule variables appearing only once: {sorted(lonely)}")


def _explanation_rule_and_binding(explanation, store: TripleStore) -> tuple[Rule, tuple]:
    chain: tuple[Triple, ...] = explanation.path
    target: Triple = explanation.target
    if not chain:
        raise DataError("empty explanation chain")
    for a, b in zip(chain, chain[1:]):
        if a.tail != b.head:
            raise DataError("explanation chain is broken")
    if chain[-1].tail != target.head:
        raise DataError("explanation chain does not end at the target head")

    # variable per chain link: link i is the entity shared by the tail of body
    # triple i and the head of body triple i+1; the last link is the target head
    n_body = len(chain)
    link_var = {i: var(i + 1) for i in range(n_body)}
    closed = chain[0].head == target.tail
    endpoint_var = var(n_body + 1)

    def body_subject(i: int) -> Term:
        if i == 0:
            return endpoint_var if closed else const(chain[0].head)
        return link_var[i - 1]

    body_atoms = [
        Atom(body_subject(i), chain[i].relation, link_var[i]) for i in range(n_body)
    ]
    head_atom = Atom(
        link_var[n_body - 1],
        target.relation,
        endpoint_var if closed else const(target.tail),
    )

    def canonical_atom(atom: Atom) -> Atom:
        info = store.relation_info[atom.relation]
        if info.is_inverse:
            return Atom(atom.object, info.canonical, atom.subject)
        return atom

    raw = Rule(
        head=canonical_atom(head_atom),
        body=tuple(canonical_atom(a) for a in body_atoms),
        kind="path" if closed else "association",
    )
    rule, mapping = raw.normalized_with_mapping()
    _check_connected(rule)
    raw_binding: dict[int, int] = {i + 1: chain[i].tail for i in range(n_body)}
    if closed:
        raw_binding[n_body + 1] = target.tail
    binding = tuple(sorted((mapping[v], e) for v, e in raw_binding.items() if v in mapping))
    return rule, binding


def explanation_to_rule(explanation, store: TripleStore) -> Rule:
    """Generalize one explanation into exactly one rule."""
    return _explanation_rule_and_binding(explanation, store)[0]


def rule_binding_of_explanation(rule: Rule, explanation, store: TripleStore) -> tuple:
    """The variable binding under which the rule grounds to the explanation."""
    built, binding = _explanation_rule_and_binding(explanation, store)
    if built != rule:
        raise DataError("rule does not generalize this explanation")
    return binding


def aggregate_rules(explanations: Iterable[tuple], store: TripleStore) -> dict[Rule, int]:
    """Deduplicate rules across explanations, counting generations."""
    counts: dict[Rule, int] = {}
    for expl in explanations:
        rule = explanation_to_rule(expl, store)
        counts[rule] = counts.get(rule, 0) + 1
    return counts


def _match_atom(atom: Atom, binding: dict[int, int], store: TripleStore) -> Iterator[dict[int, int]]:
    """Extend a partial binding over one atom using the store indexes."""

    def resolve(term: Term) -> Optional[int]:
        if term.is_variable:
            return binding.get(term.id)
        return term.id

    s, o = resolve(atom.subject), resolve(atom.object)
    if s is not None and o is not None:
        if Triple(s, atom.relation, o) in store.triple_set:
            yield binding
        return
    if s is not None:
        for tail in store.by_head_relation.get((s, atom.relation), []):
            new = dict(binding)
            new[atom.object.id] = tail
            yield new
        return
    if o is not None:
        for t in store.by_tail.get(o, []):
            if t.relation == atom.relation:
                new = dict(binding)
                new[atom.subject.id] = t.head
                yield new
        return
    for t in store.by_relation.get(atom.relation, []):
        new = dict(binding)
        new[atom.subject.id] = t.head
        if atom.object.id in new and new[atom.object.id] != t.tail:
            continue
        new[atom.object.id] = t.tail
        yield new


def _match_atoms(
    atoms: tuple[Atom, ...], binding: dict[int, int], store: TripleStore
) -> Iterator[dict[int, int]]:
    if not atoms:
        yield binding
        return
    for extended in _match_atom(atoms[0], binding, store):
        yield from _match_atoms(atoms[1:], extended, store)


def enumerate_groundings(rule: Rule, store: TripleStore) -> Iterator[tuple]:
    """Distinct full variable bindings satisfying head and all body atoms."""
    seen: set[tuple] = set()
    atoms = (rule.head, *rule.body)
    for binding in _match_atoms(atoms, {}, store):
        key = tuple(sorted(binding.items()))
        if key not in seen:
            seen.add(key)
            yield key


def head_bindings(rule: Rule, store: TripleStore) -> set[tuple]:
    """Distinct bindings of the head atom's variables satisfied in the store."""
    out: set[tuple] = set()
    for binding in _match_atom(rule.head, {}, store):
        out.add(tuple(sorted(binding.items())))
    return out


def head_coverage(rule: Rule, store: TripleStore) -> tuple[float, int, int]:
    """(hc, support, head_size): supported head bindings over all head bindings."""
    _check_connected(rule)
    heads = head_bindings(rule, store)
    head_size = len(heads)
    if head_size == 0:
        return 0.0, 0, 0
    support = 0
    for key in heads:
        binding = dict(key)
        if next(_match_atoms(rule.body, binding, store), None) is not None:
            support += 1
    return support / head_size, support, head_size


@dataclass
class FilteredRules:
    quality: list[tuple[Rule, RuleStats]]
    high_quality: list[tuple[Rule, RuleStats]]


def filter_rules(
    rules_with_stats: list[tuple[Rule, RuleStats]],
    theta: int = 5,
    hc_min: float = 0.7,
    support_min: int = 20,
) -> FilteredRules:
    """Quality = generated >= theta times; high quality additionally needs
    hc strictly above hc_min and at least support_min supports."""
    if theta < 0 or hc_min < 0 or support_min < 0:
        raise DataError("rule thresholds must be nonnegative")
    quality = [(r, s) for r, s in rules_with_stats if s.generation_count >= theta]
    high = [(r, s) for r, s in quality if s.hc > hc_min and s.support >= support_min]
    return FilteredRules(quality=quality, high_quality=high)


def apply_rules(rules: Iterable[Rule], store: TripleStore) -> list[Triple]:
    """Forward-chain each rule once; emit novel head triples, sorted and deduplicated."""
    inferred: set[Triple] = set()
    for rule in rules:
        head_vars = {t.id for t in (rule.head.subject, rule.head.object) if t.is_variable}
        body_vars = set()
        for a in rule.body:
            for t in (a.subject, a.object):
                if t.is_variable:
                    body_vars.add(t.id)
        if not head_vars <= body_vars:
            raise DataError("rule head has variables unbound by the body")
        for binding in _match_atoms(rule.body, {}, store):
            s = rule.head.subject.id if not rule.head.subject.is_variable else binding[rule.head.subject.id]
            o = rule.head.object.id if not rule.head.object.is_variable else binding[rule.head.object.id]
            triple = Triple(s, rule.head.relation, o)
            if triple not in store.triple_set:
                inferred.add(triple)
    return sorted(inferred, key=lambda t: (t.head, t.relation, t.tail))


# -- text form ------------------------------------------------------------


def format_term(term: Term, store: TripleStore) -> str:
    if term.is_variable:
        return f"?V{term.id}"
    return store.entity_names[term.id]


def format_atom(atom: Atom, store: TripleStore) -> str:
    return (
        f"({format_term(atom.subject, store)}, "
        f"{store.relation_names[atom.relation]}, "
        f"{format_term(atom.object, store)})"
    )


def format_rule(rule: Rule, store: TripleStore) -> str:
    body = " & ".join(format_atom(a, store) for a in rule.body)
    return f"{format_atom(rule.head, store)} <= {body}"


_ATOM_RE = re.compile(r"\(([^,]+), ([^,]+), ([^)]+)\)")


def parse_rule(text: str, store: TripleStore) -> Rule:
    """Parse the text form produced by format_rule."""
    if "<=" not in text:
        raise DataError(f"malformed rule text: {text!r}")
    head_txt, body_txt = text.split("<=", 1)

    def parse_atom(txt: str) -> Atom:
        m = _ATOM_RE.fullmatch(txt.strip())
        if not m:
            raise DataError(f"malformed atom: {txt!r}")
        s_txt, r_txt, o_txt = (g.strip() for g in m.groups())

        def term(t: str) -> Term:
            if t.startswith("?V"):
                return var(int(t[2:]))
            if t not in store.entity_ids:
                raise DataError(f"unknown entity in rule: {t!r}")
            return const(store.entity_ids[t])

        if r_txt not in store.relation_ids:
            raise DataError(f"unknown relation in rule: {r_txt!r}")
        return Atom(term(s_txt), store.relation_ids[r_txt], term(o_txt))

    head = parse_atom(head_txt)
    body = tuple(parse_atom(b) for b in body_txt.split(" & "))
    kind = "path" if head.subject.is_variable and head.object.is_variable else "association"
    return Rule(head=head, body=body, kind=kind).normalized()


def write_rules(
    path: str, rules_with_stats: list[tuple[Rule, RuleStats]], store: TripleStore
) -> None:
    """One rule per line with tab-separated stats columns."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("rule\tgeneration_count\thc\tsupport\tinferred\n")
        for rule, stats in rules_with_stats:
            fh.write(
                f"{format_rule(rule, store)}\t{stats.generation_count}\t"
                f"{stats.hc:.6f}\t{stats.support}\t{stats.inferred}\n"
            )


def read_rules(path: str, store: TripleStore) -> list[tuple[Rule, RuleStats]]:
    out: list[tuple[Rule, RuleStats]] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("rule\t"):
            raise DataError(f"{path}: missing rule header")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise DataError(f"{path}: expected 5 fields per rule line")
            rule = parse_rule(parts[0], store)
            stats = RuleStats(
                generation_count=int(parts[1]),
                hc=float(parts[2]),
                support=int(parts[3]),
                inferred=int(parts[4]),
            )
            out.append((rule, stats))
    return out
