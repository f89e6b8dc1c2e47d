import numpy as np
import pytest

from xkgat.errors import DataError
from xkgat.model import (
    ModelConfig,
    forward,
    init_params,
    margin_loss,
    masked_softmax_rows,
    sample_negative,
    score,
    transe_score,
)
from xkgat.store import Triple, TripleStore, augment_inverses
from xkgat.subgraph import build_subgraph


def small_graph():
    store = TripleStore()
    store.add_named("c", "p", "b")
    store.add_named("d", "p", "b")
    store.add_named("b", "q", "a")
    store.add_named("a", "r", "t")
    return augment_inverses(store)


def target_of(store):
    return Triple(store.entity_ids["a"], store.relation_ids["r"], store.entity_ids["t"])


def test_config_validation():
    with pytest.raises(DataError):
        ModelConfig(d=0)
    with pytest.raises(DataError):
        ModelConfig(d=4, layers=2, omega=(0.7, 0.7))
    with pytest.raises(DataError):
        ModelConfig(d=4, layers=2, max_depth=1)
    with pytest.raises(DataError):
        ModelConfig(d=4, norm="L3")
    cfg = ModelConfig(d=4, layers=3, max_depth=3)
    assert cfg.omega == pytest.approx((1 / 3, 1 / 3, 1 / 3))


def test_init_params_range_and_determinism():
    p1 = init_params(20, 5, 16, seed=3)
    p2 = init_params(20, 5, 16, seed=3)
    assert np.array_equal(p1.entities, p2.entities)
    assert np.array_equal(p1.relations, p2.relations)
    bound = 6 / np.sqrt(16)
    assert np.abs(p1.entities).max() <= bound
    assert np.abs(p1.relations).max() <= bound
    assert p1.entities.shape == (20, 16)
    assert p1.relations.shape == (5, 16)


def test_relation_vec_ties_inverse_to_negation():
    params = init_params(10, 4, 8, seed=1)
    for rid in range(4):
        assert np.array_equal(params.relation_vec(rid + 4), -params.relation_vec(rid))
        assert np.array_equal(params.relation_vec(rid), params.relations[rid])


def test_masked_softmax_rows_support_and_normalization():
    rng = np.random.default_rng(0)
    C = rng.normal(size=(5, 5))
    A = (rng.random((5, 5)) < 0.5).astype(float)
    np.fill_diagonal(A, 0.0)
    Cn = masked_softmax_rows(C, A)
    for i in range(5):
        if A[i].sum() > 0:
            assert Cn[i].sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(Cn[i][A[i] == 0] == 0.0)
        else:
            assert np.all(Cn[i] == 0.0)


def test_masked_softmax_is_shift_invariant():
    # large logits must not overflow
    A = np.ones((3, 3)) - np.eye(3)
    C = np.array([[0.0, 1000.0, 1001.0], [5.0, 0.0, 5.0], [-1000.0, -1000.0, 0.0]])
    Cn = masked_softmax_rows(C, A)
    assert np.isfinite(Cn).all()
    assert np.allclose(Cn.sum(axis=1), 1.0)


def test_forward_trace_shapes_and_score():
    store = small_graph()
    params = init_params(store.n_entities, store.n_canonical_relations, 8, seed=2)
    cfg = ModelConfig(d=8, layers=2, max_depth=2)
    sub = build_subgraph(store, target_of(store), max_depth=2, training=True)
    trace = forward(sub, params, cfg)
    n = sub.n
    assert len(trace.attention) == 2 and trace.attention[0].shape == (n, n)
    assert len(trace.layer_outputs) == 2 and trace.layer_outputs[0].shape == (n, 8)
    assert trace.head_repr.shape == (8,)
    target = sub.target
    expect = score(
        trace.head_repr, params.relation_vec(target.relation), params.entities[target.tail]
    )
    assert trace.score == pytest.approx(expect, abs=1e-12)


def test_forward_head_repr_is_omega_combination():
    store = small_graph()
    params = init_params(store.n_entities, store.n_canonical_relations, 8, seed=2)
    cfg = ModelConfig(d=8, layers=2, omega=(0.25, 0.75), max_depth=2)
    sub = build_subgraph(store, target_of(store), max_depth=2, training=True)
    trace = forward(sub, params, cfg)
    manual = 0.25 * trace.layer_outputs[0][-1] + 0.75 * trace.layer_outputs[1][-1]
    assert np.allclose(trace.head_repr, manual, atol=1e-12)


def test_fallback_rows_pass_head_through():
    store = small_graph()
    params = init_params(store.n_entities, store.n_canonical_relations, 8, seed=2)
    cfg = ModelConfig(d=8, layers=2, max_depth=2)
    sub = build_subgraph(store, target_of(store), max_depth=2, training=True)
    trace = forward(sub, params, cfg)
    H = np.stack([params.entities[t.head] for t in sub.triples])
    for i in np.flatnonzero(trace.fallback_rows):
        assert np.array_equal(trace.layer_outputs[0][i], H[i])


def test_score_norms():
    s_h = np.array([1.0, -2.0])
    r = np.array([0.5, 0.5])
    t = np.array([0.0, 0.0])
    assert score(s_h, r, t, "L1") == pytest.approx(3.0)
    assert score(s_h, r, t, "L2") == pytest.approx(np.sqrt(1.5**2 + 1.5**2))


def test_margin_loss_hinge():
    assert margin_loss(1.0, 5.0, 2.0) == 0.0
    assert margin_loss(3.0, 4.0, 2.0) == pytest.approx(1.0)
    with pytest.raises(DataError):
        margin_loss(1.0, 2.0, 0.0)


def test_transe_score_matches_raw_formula():
    params = init_params(6, 2, 4, seed=0)
    t = Triple(1, 0, 3)
    expect = np.abs(params.entities[1] + params.relations[0] - params.entities[3]).sum()
    assert transe_score(t, params) == pytest.approx(expect, abs=1e-12)
    inv = Triple(3, 2, 1)
    expect_inv = np.abs(params.entities[3] - params.relations[0] - params.entities[1]).sum()
    assert transe_score(inv, params) == pytest.approx(expect_inv, abs=1e-12)


def test_sample_negative_corrupts_one_side():
    rng = np.random.default_rng(0)
    t = Triple(2, 1, 5)
    heads = tails = 0
    for _ in range(200):
        neg = sample_negative(t, 10, rng)
        corrupted = neg.corrupted
        assert corrupted != t
        if corrupted.head != t.head:
            assert corrupted.tail == t.tail and corrupted.head != t.head
            heads += 1
        else:
            assert corrupted.tail != t.tail
            tails += 1
        assert corrupted.relation == t.relation
    assert heads > 50 and tails > 50
