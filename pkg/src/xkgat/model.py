"""Attention model: embeddings, layers, scoring, loss, analytic gradients.

All arithmetic is 64-bit. The relation table holds canonical relations
only; an inverse relation is materialized as the exact negation of its
canonical partner at lookup time, and gradients flowing to an inverse
lookup are negated back into the canonical row.

One basic layer over a subgraph of n triples:

    St = H + R                shared-tail representation per triple
    Sh = T - R                shared-head representation per triple
    C  = Sh @ St.T            pairwise similarity
    Cn = masked softmax of C over the adjacency support, row-wise
    S+ = Cn @ St              (rows with no neighbors fall back to H)

Stacked layers feed S+ back in as the head matrix; the target's
per-layer rows are combined with the layer weights to give the final
head representation, scored as a translation residual norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from xkgat.errors import DataError
from xkgat.store import Triple, TripleStore
from xkgat.subgraph import NeighborSubgraph


@dataclass
class Parameters:
    entities: np.ndarray  # (n_entities, d) float64
    relations: np.ndarray  # (n_canonical_relations, d) float64

    @property
    def d(self) -> int:
        return self.entities.shape[1]

    @property
    def n_canonical(self) -> int:
        return self.relations.shape[0]

    def relation_vec(self, rid: int) -> np.ndarray:
        """Relation embedding with the inverse tied to minus the canonical row."""
        if rid < self.n_canonical:
            return self.relations[rid]
        return -self.relations[rid - self.n_canonical]

    def copy(self) -> "Parameters":
        return Parameters(self.entities.copy(), self.relations.copy())


@dataclass
class ModelConfig:
    d: int = 100
    layers: int = 2
    omega: tuple[float, ...] = ()
    norm: str = "L1"
    max_depth: int = 2
    neighbor_cap: int = 1000

    def __post_init__(self):
        if self.d < 1:
            raise DataError(f"embedding dimension must be >= 1, got {self.d}")
        if self.layers < 1:
            raise DataError(f"layer count must be >= 1, got {self.layers}")
        if not self.omega:
            self.omega = tuple(1.0 / self.layers for _ in range(self.layers))
        self.omega = tuple(float(w) for w in self.omega)
        if len(self.omega) != self.layers:
            raise DataError("omega length must equal the layer count")
        if any(w < 0 for w in self.omega):
            raise DataError("layer weights must be nonnegative")
        if abs(sum(self.omega) - 1.0) > 1e-9:
            raise DataError(f"layer weights must sum to 1, got {sum(self.omega)}")
        if self.norm not in ("L1", "L2"):
            raise DataError(f"norm must be L1 or L2, got {self.norm!r}")
        if self.max_depth < self.layers:
            raise DataError("max_depth must be >= layer count")


@dataclass
class ForwardTrace:
    attention: list[np.ndarray]  # C^1..C^m, each (n, n)
    layer_outputs: list[np.ndarray]  # S^1..S^m, each (n, d)
    head_repr: np.ndarray  # s^h, (d,)
    score: float
    degrees: np.ndarray  # adjacency row degrees, (n,)
    # retained inputs for the backward pass
    head_inputs: list[np.ndarray] = field(default_factory=list)  # H, S^1..S^{m-1}
    rel_matrix: np.ndarray | None = None
    tail_matrix: np.ndarray | None = None

    @property
    def fallback_rows(self) -> np.ndarray:
        return self.degrees == 0


def init_params(n_entities: int, n_relations_canonical: int, d: int, seed: int = 0) -> Parameters:
    """Uniform init on [-6/sqrt(d), 6/sqrt(d)], deterministic under seed."""
    if n_entities < 1 or n_relations_canonical < 1 or d < 1:
        raise DataError("entity/relation counts and dimension must be positive")
    rng = np.random.default_rng(seed)
    bound = 6.0 / np.sqrt(d)
    return Parameters(
        entities=rng.uniform(-bound, bound, size=(n_entities, d)),
        relations=rng.uniform(-bound, bound, size=(n_relations_canonical, d)),
    )


def masked_softmax_rows(C: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Row-wise softmax over the adjacency support; zero-degree rows stay zero."""
    n = C.shape[0]
    Cn = np.zeros_like(C)
    support = A > 0
    for i in range(n):
        sup = support[i]
        if not sup.any():
            continue
        vals = C[i, sup]
        vals = np.exp(vals - vals.max())
        Cn[i, sup] = vals / vals.sum()
    return Cn


def basic_layer(A: np.ndarray, H: np.ndarray, R: np.ndarray, T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One attention layer; returns (S+, Cn)."""
    for name, M in (("A", A), ("H", H), ("R", R), ("T", T)):
        if not np.isfinite(M).all():
            raise DataError(f"non-finite values in layer input {name}")
    St = H + R
    Sh = T - R
    C = Sh @ St.T
    Cn = masked_softmax_rows(C, A)
    S_plus = Cn @ St
    fallback = A.sum(axis=1) == 0
    S_plus[fallback] = H[fallback]
    return S_plus, Cn


def gather_matrices(
    subgraph: NeighborSubgraph, params: Parameters
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack head/relation/tail embedding rows for the subgraph triples."""
    H = params.entities[[t.head for t in subgraph.triples]]
    R = np.stack([params.relation_vec(t.relation) for t in subgraph.triples])
    T = params.entities[[t.tail for t in subgraph.triples]]
    return H, R, T


def forward(subgraph: NeighborSubgraph, params: Parameters, config: ModelConfig) -> ForwardTrace:
    """Multi-layer forward pass over a subgraph, recording attention per layer."""
    H, R, T = gather_matrices(subgraph, params)
    A = subgraph.adjacency
    attention: list[np.ndarray] = []
    outputs: list[np.ndarray] = []
    head_inputs: list[np.ndarray] = []
    current = H
    for _ in range(config.layers):
        head_inputs.append(current)
        S_plus, Cn = basic_layer(A, current, R, T)
        attention.append(Cn)
        outputs.append(S_plus)
        current = S_plus
    s_h = np.zeros(params.d)
    for w, S in zip(config.omega, outputs):
        s_h = s_h + w * S[-1]
    target = subgraph.target
    s = score(s_h, params.relation_vec(target.relation), params.entities[target.tail], config.norm)
    return ForwardTrace(
        attention=attention,
        layer_outputs=outputs,
        head_repr=s_h,
        score=s,
        degrees=A.sum(axis=1),
        head_inputs=head_inputs,
        rel_matrix=R,
        tail_matrix=T,
    )


def score(s_h: np.ndarray, r: np.ndarray, t: np.ndarray, norm: str = "L1") -> float:
    """Translation residual norm; lower means more plausible."""
    residual = s_h + r - t
    if norm == "L1":
        return float(np.abs(residual).sum())
    return float(np.sqrt((residual**2).sum()))


def margin_loss(pos_score: float, neg_score: float, gamma: float) -> float:
    if gamma <= 0:
        raise DataError(f"margin must be positive, got {gamma}")
    return max(0.0, pos_score + gamma - neg_score)


def transe_score(triple: Triple, params: Parameters, norm: str = "L1") -> float:
    """Plain translation score from raw embeddings, no neighbor aggregation."""
    return score(
        params.entities[triple.head],
        params.relation_vec(triple.relation),
        params.entities[triple.tail],
        norm,
    )


@dataclass(frozen=True)
class NegativeSample:
    corrupted: Triple
    side: str  # "head" or "tail"


def sample_negative(triple: Triple, n_entities: int, rng: np.random.Generator) -> NegativeSample:
    """Corrupt head or tail (even odds) with a uniform entity != the original."""
    if n_entities < 2:
        raise DataError("need at least 2 entities to corrupt a triple")
    side = "head" if rng.random() < 0.5 else "tail"
    original = triple.head if side == "head" else triple.tail
    # draw from [0, n-1) and shift past the original: uniform over e != original
    e = int(rng.integers(0, n_entities - 1))
    if e >= original:
        e += 1
    if side == "head":
        return NegativeSample(Triple(e, triple.relation, triple.tail), side)
    return NegativeSample(Triple(triple.head, triple.relation, e), side)


@dataclass
class GradientResult:
    loss: float
    d_entities: np.ndarray  # (n_entities, d)
    d_relations: np.ndarray  # (n_canonical_relations, d)


def _norm_grad(residual: np.ndarray, norm: str) -> np.ndarray:
    if norm == "L1":
        # subgradient 0 at exact zeros
        return np.sign(residual)
    nrm = np.sqrt((residual**2).sum())
    if nrm == 0.0:
        return np.zeros_like(residual)
    return residual / nrm


def _backward_subgraph(
    subgraph: NeighborSubgraph,
    trace: ForwardTrace,
    params: Parameters,
    config: ModelConfig,
    upstream: float,
    d_entities: np.ndarray,
    d_relations: np.ndarray,
) -> None:
    """Accumulate d(upstream * score)/d(params) for one subgraph."""

    def acc_rel(rid: int, vec: np.ndarray) -> None:
        if rid < params.n_canonical:
            d_relations[rid] += vec
        else:
            d_relations[rid - params.n_canonical] -= vec

    target = subgraph.target
    r_t = params.relation_vec(target.relation)
    t_t = params.entities[target.tail]
    residual = trace.head_repr + r_t - t_t
    du = upstream * _norm_grad(residual, config.norm)
    if not np.isfinite(du).all():
        raise DataError(f"non-finite gradient at target {subgraph.target}")
    acc_rel(target.relation, du)
    d_entities[target.tail] -= du

    n = subgraph.n
    d = params.d
    A = subgraph.adjacency
    support = A > 0
    deg = trace.degrees
    R = trace.rel_matrix

    # dL/dS^k accumulators; the omega combination feeds the target row of each layer
    layer_grads = [np.zeros((n, d)) for _ in range(config.layers)]
    for k, w in enumerate(config.omega):
        layer_grads[k][-1] += w * du

    dR_mat = np.zeros((n, d))
    dT_mat = np.zeros((n, d))
    for k in range(config.layers - 1, -1, -1):
        G = layer_grads[k]
        Hk = trace.head_inputs[k]
        Cn = trace.attention[k]
        St = Hk + R
        Sh = trace.tail_matrix - R

        dHk = np.zeros((n, d))
        fallback = deg == 0
        dHk[fallback] = G[fallback]
        G_act = G.copy()
        G_act[fallback] = 0.0

        # aggregation S+ = Cn @ St
        dCn = (G_act @ St.T) * support
        dSt = Cn.T @ G_act

        # masked softmax rows: dC'_i = Cn_i * (dCn_i - <Cn_i, dCn_i>)
        row_dot = (Cn * dCn).sum(axis=1, keepdims=True)
        dC = Cn * (dCn - row_dot)

        # C = Sh @ St.T
        dSh = dC @ St
        dSt += dC.T @ Sh

        dHk += dSt
        dR_mat += dSt - dSh
        dT_mat += dSh
        if k > 0:
            layer_grads[k - 1] += dHk
        else:
            for i, triple in enumerate(subgraph.triples):
                d_entities[triple.head] += dHk[i]
    for i, triple in enumerate(subgraph.triples):
        acc_rel(triple.relation, dR_mat[i])
        d_entities[triple.tail] += dT_mat[i]


def gradients(
    batch: list[tuple[NeighborSubgraph, NeighborSubgraph]],
    params: Parameters,
    config: ModelConfig,
    gamma: float,
) -> GradientResult:
    """Analytic gradients of the summed margin loss over (positive, negative) pairs."""
    if not batch:
        raise DataError("empty batch")
    d_entities = np.zeros_like(params.entities)
    d_relations = np.zeros_like(params.relations)
    total = 0.0
    for pos_sub, neg_sub in batch:
        pos_trace = forward(pos_sub, params, config)
        neg_trace = forward(neg_sub, params, config)
        loss = margin_loss(pos_trace.score, neg_trace.score, gamma)
        total += loss
        if loss <= 0.0:
            continue
        _backward_subgraph(pos_sub, pos_trace, params, config, 1.0, d_entities, d_relations)
        _backward_subgraph(neg_sub, neg_trace, params, config, -1.0, d_entities, d_relations)
    if not (np.isfinite(d_entities).all() and np.isfinite(d_relations).all()):
        raise DataError("non-finite gradient encountered")
    return GradientResult(loss=total, d_entities=d_entities, d_relations=d_relations)
