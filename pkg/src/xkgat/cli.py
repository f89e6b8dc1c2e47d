"""Command-line entry point for the full pipeline.

Exit codes: 0 success, 1 usage error, 2 data/config error.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys

import numpy as np

from xkgat import checkpoint as ckpt
from xkgat import evaluator, explain, rules, store as kgstore, synth, trainer
from xkgat.config import RunConfig, load_run_config
from xkgat.errors import XkgatError
from xkgat.store import Triple


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _load_targets(path: str, store: kgstore.TripleStore) -> set[int]:
    out: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            name = line.strip()
            if not name:
                continue
            if name not in store.relation_ids:
                raise XkgatError(f"unknown target relation {name!r}")
            out.add(store.relation_ids[name])
    return out


def _read_triple_list(path: str, store: kgstore.TripleStore) -> list[Triple]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise XkgatError(f"{path}:{lineno}: expected 3 fields")
            h, r, t = parts
            out.append(
                Triple(store.intern_entity(h), store.intern_relation(r), store.intern_entity(t))
            )
    return out


def _build_split(args, cfg: RunConfig) -> kgstore.Split:
    """Assemble a Split from pre-split TSV files; train is inverse-augmented."""
    train = kgstore.load_triples(args.train)
    targets = _load_targets(args.targets, train)
    valid = _read_triple_list(args.valid, train) if args.valid else []
    test = _read_triple_list(args.test, train) if getattr(args, "test", None) else []
    train = kgstore.augment_inverses(train)
    return kgstore.Split(train=train, valid=valid, test=test, target_relations=targets)


def _cmd_synth(args) -> int:
    parser = configparser.ConfigParser()
    if not parser.read(args.config):
        raise XkgatError(f"config file not found: {args.config}")
    if "synthetic" not in parser:
        raise XkgatError("config is missing the [synthetic] section")
    sec = parser["synthetic"]
    planted = []
    for section in parser.sections():
        if not section.startswith("rule."):
            continue
        r = parser[section]
        planted.append(
            synth.PlantedRule(
                kind=r.get("kind", "association"),
                head_relation=r["head_relation"],
                body_relation=r["body_relation"],
                subjects=r.getint("subjects", 100),
                confidence=r.getfloat("confidence", 1.0),
                head_constant=r.get("head_constant"),
                body_constant=r.get("body_constant"),
            )
        )
    store, truth = synth.generate_synthetic(
        n_entities=sec.getint("entities", 2000),
        n_relations=sec.getint("relations", 20),
        planted_rules=planted,
        noise_triples=sec.getint("noise_triples", 0),
        seed=sec.getint("seed", args.seed),
    )
    os.makedirs(args.out, exist_ok=True)
    kgstore.write_triples(os.path.join(args.out, "triples.tsv"), store)
    with open(os.path.join(args.out, "targets.txt"), "w", encoding="utf-8") as fh:
        for pr in planted:
            fh.write(pr.head_relation + "\n")
    with open(os.path.join(args.out, "rules_truth.txt"), "w", encoding="utf-8") as fh:
        for rule in truth:
            fh.write(rules.format_rule(rule, store) + "\n")
    return 0


def _cmd_split(args, cfg: RunConfig) -> int:
    store = kgstore.load_triples(args.triples)
    targets = _load_targets(args.targets, store)
    split = kgstore.split_dataset(
        store,
        targets,
        test_fraction=cfg.test_fraction,
        valid_fraction=cfg.valid_fraction,
        seed=cfg.seed,
        regime=cfg.regime,
    )
    os.makedirs(args.out, exist_ok=True)
    kgstore.write_triples(os.path.join(args.out, "train.tsv"), split.train)
    kgstore.write_triples(os.path.join(args.out, "valid.tsv"), split.valid, store)
    kgstore.write_triples(os.path.join(args.out, "test.tsv"), split.test, store)
    return 0


def _cmd_train(args, cfg: RunConfig) -> int:
    split = _build_split(args, cfg)
    model_config = cfg.model_config()
    init = "from_checkpoint" if args.init_checkpoint else "uniform"
    train_config = cfg.train_config(init=init, init_checkpoint=args.init_checkpoint)
    if args.transe:
        result = trainer.pretrain_transe(split, cfg.d, train_config)
    else:
        result = trainer.train(split, model_config, train_config)
    os.makedirs(args.out, exist_ok=True)
    ckpt.save_checkpoint(
        os.path.join(args.out, "checkpoint"),
        result.params,
        meta={
            "seed": cfg.seed,
            "layers": cfg.layers,
            "norm": cfg.norm,
            "best_epoch": result.best_epoch,
            "transe": bool(args.transe),
        },
    )
    trainer.write_history(os.path.join(args.out, "history.tsv"), result.history)
    return 0


def _cmd_eval(args, cfg: RunConfig) -> int:
    split = _build_split(args, cfg)
    loaded = ckpt.load_checkpoint(args.checkpoint, expect_d=cfg.d)
    model_config = cfg.model_config()
    transe = bool(loaded.meta.get("transe"))
    reports = evaluator.run_plp(split, loaded.params, model_config, seed=cfg.seed, transe=transe)
    os.makedirs(args.out, exist_ok=True)
    evaluator.write_report(os.path.join(args.out, "metrics.tsv"), reports)
    if args.predictions_out:
        with open(args.predictions_out, "w", encoding="utf-8") as fh:
            fh.write("head\trelation\ttail\tscore\n")
            for t in split.test:
                scores = evaluator.candidate_tail_scores(
                    t, loaded.params, model_config, split.train, seed=cfg.seed, transe=transe
                )
                for e in split.train.by_head_relation.get((t.head, t.relation), []):
                    scores[e] = np.inf  # drop already-known tails
                best = int(np.argmin(scores))
                h, r, _ = split.train.triple_names(t)
                fh.write(f"{h}\t{r}\t{split.train.entity_names[best]}\t{scores[best]:.10g}\n")
    return 0


def _cmd_explain(args, cfg: RunConfig) -> int:
    split = _build_split(args, cfg)
    loaded = ckpt.load_checkpoint(args.checkpoint, expect_d=cfg.d)
    model_config = cfg.model_config()
    records = []
    for target in split.test:
        top = explain.explain_target(
            target, loaded.params, split.train, model_config, cfg.top_k, seed=cfg.seed
        )
        records.append(
            (target, [(e, explain.count_supports(e, split.train)) for e in top])
        )
    os.makedirs(args.out, exist_ok=True)
    explain.write_explanations(os.path.join(args.out, "explanations.tsv"), records, split.train)
    report = explain.explanation_report(
        split.test, loaded.params, split.train, model_config, k=cfg.top_k, seed=cfg.seed
    )
    with open(os.path.join(args.out, "explanation_report.tsv"), "w", encoding="utf-8") as fh:
        fh.write("metric\tvalue\n")
        fh.write(f"recall\t{report.recall:.6f}\n")
        avg = "" if report.avg_support is None else f"{report.avg_support:.6f}"
        fh.write(f"avg_support\t{avg}\n")
        fh.write(f"k\t{report.k}\n")
    return 0


def _cmd_mine(args, cfg: RunConfig) -> int:
    train = kgstore.load_triples(args.train)
    train = kgstore.augment_inverses(train)
    records = explain.read_explanations(args.explanations, train)
    counts = rules.aggregate_rules(
        (e for _, explanations in records for e, _ in explanations), train
    )
    with_stats = []
    for rule, count in counts.items():
        hc, support, _ = rules.head_coverage(rule, train)
        stats = rules.RuleStats(generation_count=count, hc=hc, support=support)
        with_stats.append((rule, stats))
    filtered = rules.filter_rules(with_stats, cfg.theta, cfg.hc_min, cfg.support_min)
    for rule, stats in filtered.high_quality:
        stats.inferred = len(rules.apply_rules([rule], train))
    os.makedirs(args.out, exist_ok=True)
    with_stats.sort(key=lambda rs: (-rs[1].generation_count, rules.format_rule(rs[0], train)))
    rules.write_rules(os.path.join(args.out, "rules_all.tsv"), with_stats, train)
    rules.write_rules(os.path.join(args.out, "rules_quality.tsv"), filtered.quality, train)
    rules.write_rules(os.path.join(args.out, "rules_high_quality.tsv"), filtered.high_quality, train)
    return 0


def _cmd_infer(args, cfg: RunConfig) -> int:
    store = kgstore.load_triples(args.triples)
    store = kgstore.augment_inverses(store)
    loaded = rules.read_rules(args.rules, store)
    novel = rules.apply_rules([r for r, _ in loaded], store)
    with open(args.out, "w", encoding="utf-8") as fh:
        for t in novel:
            h, r, tl = store.triple_names(t)
            fh.write(f"{h}\t{r}\t{tl}\n")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from xkgat.review import ReviewQueue, create_app

    queue = ReviewQueue(args.predictions, args.explanations, args.log)
    app = create_app(queue, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="xkgat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="INI run config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="generate a synthetic KG with planted rules")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("split", help="carve train/valid/test from a triple file")
    common(p)
    p.add_argument("--triples", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--test-fraction", type=float, default=None, dest="test_fraction")
    p.add_argument("--regime", choices=["all", "part"], default=None)

    p = sub.add_parser("train", help="train the attention model (or TransE with --transe)")
    common(p)
    p.add_argument("--train", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--transe", action="store_true")
    p.add_argument("--init-checkpoint", default=None)
    p.add_argument("--learning-rate", type=float, default=None, dest="learning_rate")
    p.add_argument("--max-epochs", type=int, default=None, dest="max_epochs")
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--d", type=int, default=None)

    p = sub.add_parser("eval", help="partial link prediction metrics")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--valid", default=None)
    p.add_argument("--test", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--predictions-out", default=None, dest="predictions_out")
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--d", type=int, default=None)

    p = sub.add_parser("explain", help="top-k explanations for test triples")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--valid", default=None)
    p.add_argument("--test", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--top-k", type=int, default=None, dest="top_k")

    p = sub.add_parser("mine", help="generalize explanations into rules and filter")
    common(p)
    p.add_argument("--explanations", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--theta", type=int, default=None)

    p = sub.add_parser("infer", help="apply mined rules to a triple file")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rules", required=True)
    p.add_argument("--triples", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("serve", help="serve the human review queue")
    p.add_argument("--predictions", required=True)
    p.add_argument("--explanations", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--static", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)

    return parser


_OVERRIDE_KEYS = (
    "seed",
    "test_fraction",
    "regime",
    "learning_rate",
    "max_epochs",
    "layers",
    "d",
    "top_k",
    "theta",
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "serve":
            return _cmd_serve(args)
        overrides = {k: getattr(args, k, None) for k in _OVERRIDE_KEYS}
        cfg = load_run_config(getattr(args, "config", None), overrides)
        if args.command == "split":
            return _cmd_split(args, cfg)
        if args.command == "train":
            return _cmd_train(args, cfg)
        if args.command == "eval":
            return _cmd_eval(args, cfg)
        if args.command == "explain":
            return _cmd_explain(args, cfg)
        if args.command == "mine":
            return _cmd_mine(args, cfg)
        if args.command == "infer":
            return _cmd_infer(args, cfg)
        raise _UsageError(f"unknown subcommand {args.command!r}")
    except XkgatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
