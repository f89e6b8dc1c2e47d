"""Mini-batch training with Adam, early stopping on validation MRR.

"Iterations" from the source protocol are read as epochs over the
training set. Subgraphs are rebuilt from the immutable store every batch
so a run is fully determined by (data, seeds, config). The plain
translation baseline shares the loss, negatives, and optimizer and its
checkpoints can seed the attention model.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from xkgat.errors import DataError
from xkgat.model import (
    GradientResult,
    ModelConfig,
    Parameters,
    gradients,
    init_params,
    margin_loss,
    sample_negative,
    transe_score,
    _norm_grad,
)
from xkgat.store import Split, Triple
from xkgat.subgraph import build_subgraph
from xkgat.checkpoint import Checkpoint


@dataclass
class TrainConfig:
    batch_size: int = 100
    learning_rate: float = 1e-4
    gamma: float = 2.0
    max_epochs: int = 5
    patience: int = 2
    seed: int = 0
    init: str = "uniform"  # or "from_checkpoint"
    init_checkpoint: Optional[str] = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.batch_size < 1:
            raise DataError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be positive")
        if self.patience < 1:
            raise DataError("patience must be >= 1")


@dataclass
class OptimizerState:
    m_entities: np.ndarray
    v_entities: np.ndarray
    m_relations: np.ndarray
    v_relations: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, params: Parameters) -> "OptimizerState":
        return cls(
            m_entities=np.zeros_like(params.entities),
            v_entities=np.zeros_like(params.entities),
            m_relations=np.zeros_like(params.relations),
            v_relations=np.zeros_like(params.relations),
        )


def adam_step(
    params: Parameters, grads: GradientResult, state: OptimizerState, config: TrainConfig
) -> None:
    """Standard Adam update with bias correction, in place."""
    state.step += 1
    t = state.step
    b1, b2, lr, eps = config.beta1, config.beta2, config.learning_rate, config.eps
    for table, g, m, v in (
        (params.entities, grads.d_entities, state.m_entities, state.v_entities),
        (params.relations, grads.d_relations, state.m_relations, state.v_relations),
    ):
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        update = lr * m_hat / (np.sqrt(v_hat) + eps)
        if not np.isfinite(update).all():
            raise DataError("non-finite optimizer update")
        table -= update


@dataclass
class EpochRecord:
    epoch: int
    mean_loss: float
    valid_mrr: float
    seconds: float


@dataclass
class TrainResult:
    params: Parameters
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_mrr: float = 0.0


def _init_parameters(split: Split, d: int, config: TrainConfig) -> Parameters:
    store = split.train
    if config.init == "from_checkpoint":
        from xkgat.checkpoint import load_checkpoint

        if not config.init_checkpoint:
            raise DataError("init=from_checkpoint requires init_checkpoint")
        ckpt = load_checkpoint(config.init_checkpoint, expect_d=d)
        if ckpt.params.entities.shape[0] != store.n_entities:
            raise DataError("checkpoint entity count does not match the store")
        return ckpt.params.copy()
    return init_params(store.n_entities, store.n_canonical_relations, d, seed=config.seed)


def _validation_mrr(split: Split, params: Parameters, model_config: ModelConfig, transe: bool) -> float:
    from xkgat.evaluator import compute_metrics, rank_tail

    filter_set = set(split.train.triple_set) | set(split.valid) | set(split.test)
    ranks = [
        rank_tail(t, params, model_config, split.train, filter_set, transe=transe)
        for t in split.valid
    ]
    return compute_metrics(ranks, setting="filter").mrr


def _run_training(
    split: Split,
    model_config: ModelConfig,
    train_config: TrainConfig,
    transe: bool,
    callbacks: Optional[list[Callable[[EpochRecord], None]]] = None,
) -> TrainResult:
    store = split.train
    if not store.triples:
        raise DataError("empty training store")
    if not store.augmented:
        raise DataError("training requires an inverse-augmented store")
    if train_config.max_epochs > 0 and not split.valid:
        raise DataError("early stopping requires a nonempty validation set")

    params = _init_parameters(split, model_config.d, train_config)
    state = OptimizerState.zeros_like(params)
    result = TrainResult(params=params.copy())
    if train_config.max_epochs == 0:
        return result

    best_mrr = -1.0
    stale = 0
    rng = np.random.default_rng((train_config.seed, 1))
    triples = list(store.triples)
    for epoch in range(1, train_config.max_epochs + 1):
        started = time.monotonic()
        order = rng.permutation(len(triples))
        epoch_loss = 0.0
        for start in range(0, len(order), train_config.batch_size):
            idx = order[start : start + train_config.batch_size]
            batch = [triples[i] for i in idx]
            negatives = [sample_negative(t, store.n_entities, rng).corrupted for t in batch]
            if transe:
                grads = _transe_gradients(batch, negatives, params, model_config, train_config.gamma)
            else:
                pairs = []
                for pos, neg in zip(batch, negatives):
                    pos_sub = build_subgraph(
                        store, pos, model_config.max_depth, model_config.neighbor_cap,
                        seed=train_config.seed, training=True,
                    )
                    neg_sub = build_subgraph(
                        store, neg, model_config.max_depth, model_config.neighbor_cap,
                        seed=train_config.seed,
                    )
                    pairs.append((pos_sub, neg_sub))
                grads = gradients(pairs, params, model_config, train_config.gamma)
            epoch_loss += grads.loss
            adam_step(params, grads, state, train_config)
        mrr = _validation_mrr(split, params, model_config, transe)
        record = EpochRecord(
            epoch=epoch,
            mean_loss=epoch_loss / len(triples),
            valid_mrr=mrr,
            seconds=time.monotonic() - started,
        )
        result.history.append(record)
        for cb in callbacks or []:
            cb(record)
        if mrr > best_mrr:
            best_mrr = mrr
            result.params = params.copy()
            result.best_epoch = epoch
            result.best_mrr = mrr
            stale = 0
        else:
            stale += 1
            if stale >= train_config.patience:
                break
    return result


def train(
    split: Split,
    model_config: ModelConfig,
    train_config: TrainConfig,
    callbacks: Optional[list[Callable[[EpochRecord], None]]] = None,
) -> TrainResult:
    """Train the attention model; returns the best-MRR parameters and history."""
    return _run_training(split, model_config, train_config, transe=False, callbacks=callbacks)


def pretrain_transe(
    split: Split,
    d: int,
    train_config: TrainConfig,
    callbacks: Optional[list[Callable[[EpochRecord], None]]] = None,
) -> TrainResult:
    """Train the plain translation baseline with the same loss and negatives."""
    model_config = ModelConfig(d=d, layers=1, max_depth=1)
    return _run_training(split, model_config, train_config, transe=True, callbacks=callbacks)


def _transe_gradients(
    batch: list[Triple],
    negatives: list[Triple],
    params: Parameters,
    model_config: ModelConfig,
    gamma: float,
) -> GradientResult:
    d_entities = np.zeros_like(params.entities)
    d_relations = np.zeros_like(params.relations)
    total = 0.0

    def acc(triple: Triple, upstream: float) -> None:
        residual = (
            params.entities[triple.head]
            + params.relation_vec(triple.relation)
            - params.entities[triple.tail]
        )
        du = upstream * _norm_grad(residual, model_config.norm)
        d_entities[triple.head] += du
        d_entities[triple.tail] -= du
        if triple.relation < params.n_canonical:
            d_relations[triple.relation] += du
        else:
            d_relations[triple.relation - params.n_canonical] -= du

    for pos, neg in zip(batch, negatives):
        loss = margin_loss(
            transe_score(pos, params, model_config.norm),
            transe_score(neg, params, model_config.norm),
            gamma,
        )
        total += loss
        if loss <= 0.0:
            continue
        acc(pos, 1.0)
        acc(neg, -1.0)
    return GradientResult(loss=total, d_entities=d_entities, d_relations=d_relations)


def write_history(path: str, history: list[EpochRecord]) -> None:
    """One line per epoch: epoch, mean_loss, valid_mrr, seconds."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch\tmean_loss\tvalid_mrr\tseconds\n")
        for rec in history:
            fh.write(f"{rec.epoch}\t{rec.mean_loss:.10g}\t{rec.valid_mrr:.10g}\t{rec.seconds:.3f}\n")
