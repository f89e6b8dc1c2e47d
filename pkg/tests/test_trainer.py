import numpy as np
import pytest

from xkgat.checkpoint import load_checkpoint, save_checkpoint
from xkgat.errors import DataError
from xkgat.model import GradientResult, ModelConfig, init_params
from xkgat.store import TripleStore, augment_inverses, split_dataset
from xkgat.trainer import (
    OptimizerState,
    TrainConfig,
    adam_step,
    pretrain_transe,
    train,
    write_history,
)


def toy_split(seed=0):
    store = TripleStore()
    for i in range(30):
        store.add_named(f"a{i}", "body", f"b{i}")
        store.add_named(f"a{i}", "head", f"v{i % 3}")
    rid = store.relation_ids["head"]
    split = split_dataset(store, {rid}, test_fraction=0.2, valid_fraction=0.1, seed=seed)
    split.train = augment_inverses(split.train)
    return split


def small_cfg():
    return ModelConfig(d=6, layers=2, max_depth=2, neighbor_cap=20)


def test_train_config_validation():
    with pytest.raises(DataError):
        TrainConfig(batch_size=0)
    with pytest.raises(DataError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(DataError):
        TrainConfig(patience=0)


def test_adam_step_matches_reference():
    params = init_params(4, 2, 3, seed=0)
    state = OptimizerState.zeros_like(params)
    g_ent = np.full_like(params.entities, 0.5)
    g_rel = np.full_like(params.relations, -0.25)
    before_ent = params.entities.copy()
    before_rel = params.relations.copy()
    lr = 0.1
    grads = GradientResult(d_entities=g_ent, d_relations=g_rel, loss=0.0)
    adam_step(params, grads, state, TrainConfig(learning_rate=lr))
    # first step with bias correction collapses to lr * g / (|g| + eps)
    expect_ent = before_ent - lr * 0.5 / (0.5 + 1e-8)
    expect_rel = before_rel - lr * (-0.25) / (0.25 + 1e-8)
    assert np.allclose(params.entities, expect_ent, atol=1e-9)
    assert np.allclose(params.relations, expect_rel, atol=1e-9)


def test_adam_step_rejects_nonfinite():
    params = init_params(4, 2, 3, seed=0)
    state = OptimizerState.zeros_like(params)
    g = np.full_like(params.entities, np.nan)
    grads = GradientResult(d_entities=g, d_relations=np.zeros_like(params.relations), loss=0.0)
    with pytest.raises(DataError):
        adam_step(params, grads, state, TrainConfig(learning_rate=0.1))


def test_train_zero_epochs_returns_init_unchanged():
    split = toy_split()
    cfg = TrainConfig(batch_size=8, learning_rate=0.01, max_epochs=0, seed=4)
    result = train(split, small_cfg(), cfg)
    reference = init_params(
        split.train.n_entities, split.train.n_canonical_relations, 6, seed=4
    )
    assert np.array_equal(result.params.entities, reference.entities)
    assert result.history == []


def test_train_reduces_loss_and_is_deterministic():
    split = toy_split()
    cfg = TrainConfig(batch_size=8, learning_rate=0.02, max_epochs=3, patience=5, seed=4)
    r1 = train(split, small_cfg(), cfg)
    r2 = train(split, small_cfg(), cfg)
    assert len(r1.history) == 3
    assert r1.history[-1].mean_loss < r1.history[0].mean_loss
    assert np.array_equal(r1.params.entities, r2.params.entities)
    assert np.array_equal(r1.params.relations, r2.params.relations)
    for a, b in zip(r1.history, r2.history):
        assert a.mean_loss == b.mean_loss and a.valid_mrr == b.valid_mrr


def test_early_stopping_keeps_best_validation_params():
    split = toy_split()
    cfg = TrainConfig(batch_size=8, learning_rate=0.02, max_epochs=4, patience=1, seed=4)
    result = train(split, small_cfg(), cfg)
    best = max(r.valid_mrr for r in result.history)
    assert result.best_mrr == best
    stop_epoch = next(r.epoch for r in result.history if r.valid_mrr == best)
    # no more than `patience` epochs after the best one were run
    assert result.history[-1].epoch <= stop_epoch + 1


def test_pretrain_transe_runs_and_improves():
    split = toy_split()
    cfg = TrainConfig(batch_size=8, learning_rate=0.05, max_epochs=3, patience=5, seed=4)
    result = pretrain_transe(split, d=6, train_config=cfg)
    assert result.history[-1].mean_loss < result.history[0].mean_loss


def test_init_from_checkpoint(tmp_path):
    split = toy_split()
    base = init_params(split.train.n_entities, split.train.n_canonical_relations, 6, seed=99)
    ckpt = tmp_path / "ckpt"
    save_checkpoint(str(ckpt), base)
    cfg = TrainConfig(
        batch_size=8,
        learning_rate=0.02,
        max_epochs=0,
        seed=4,
        init="from_checkpoint",
        init_checkpoint=str(ckpt),
    )
    result = train(split, small_cfg(), cfg)
    assert np.array_equal(result.params.entities, base.entities)


def test_checkpoint_roundtrip_is_byte_exact(tmp_path):
    params = init_params(17, 5, 9, seed=123)
    path = tmp_path / "ckpt"
    save_checkpoint(str(path), params, meta={"note": "x"})
    loaded = load_checkpoint(str(path))
    assert np.array_equal(loaded.params.entities, params.entities)
    assert np.array_equal(loaded.params.relations, params.relations)
    assert loaded.params.entities.dtype == np.float64
    assert loaded.meta.get("note") == "x"
    with pytest.raises(DataError):
        load_checkpoint(str(path), expect_d=4)


def test_write_history(tmp_path):
    split = toy_split()
    cfg = TrainConfig(batch_size=8, learning_rate=0.02, max_epochs=2, patience=5, seed=4)
    result = train(split, small_cfg(), cfg)
    out = tmp_path / "history.tsv"
    write_history(str(out), result.history)
    lines = out.read_text().strip().split("\n")
    assert lines[0].split("\t")[:3] == ["epoch", "mean_loss", "valid_mrr"]
    assert len(lines) == 1 + len(result.history)
