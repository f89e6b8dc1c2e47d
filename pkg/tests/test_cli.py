"""End-to-end pipeline through the command-line entry point."""

import os

import pytest

from xkgat.cli import main

SYNTH_INI = """\
[synthetic]
entities = 80
relations = 6
noise_triples = 40
seed = 3

[rule.0]
kind = association
head_relation = rel0
body_relation = rel2
subjects = 30

[rule.1]
kind = path
head_relation = rel1
body_relation = rel3
subjects = 30
"""

RUN_INI = """\
[model]
d = 8
layers = 2
max_depth = 2
neighbor_cap = 30

[train]
learning_rate = 0.05
max_epochs = 2
batch_size = 20
seed = 3

[split]
test_fraction = 0.2
valid_fraction = 0.1
seed = 3

[rules]
theta = 1
hc_min = 0.5
support_min = 5
"""


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    (root / "synth.ini").write_text(SYNTH_INI)
    (root / "run.ini").write_text(RUN_INI)
    return root


def run(argv):
    return main([str(a) for a in argv])


def test_full_pipeline(workspace):
    root = workspace
    cfg = root / "run.ini"

    assert run(["synth", "--config", root / "synth.ini", "--out", root / "data"]) == 0
    assert (root / "data" / "triples.tsv").exists()
    assert (root / "data" / "targets.txt").read_text().split() == ["rel0", "rel1"]
    assert len((root / "data" / "rules_truth.txt").read_text().strip().split("\n")) == 2

    assert run([
        "split", "--config", cfg,
        "--triples", root / "data" / "triples.tsv",
        "--targets", root / "data" / "targets.txt",
        "--out", root / "splits",
    ]) == 0
    for name in ("train.tsv", "valid.tsv", "test.tsv"):
        assert (root / "splits" / name).exists()

    assert run([
        "train", "--config", cfg,
        "--train", root / "splits" / "train.tsv",
        "--valid", root / "splits" / "valid.tsv",
        "--targets", root / "data" / "targets.txt",
        "--out", root / "model",
    ]) == 0
    assert (root / "model" / "checkpoint" / "meta.json").exists()
    history = (root / "model" / "history.tsv").read_text().strip().split("\n")
    assert len(history) == 3  # header + 2 epochs

    assert run([
        "eval", "--config", cfg,
        "--checkpoint", root / "model" / "checkpoint",
        "--train", root / "splits" / "train.tsv",
        "--valid", root / "splits" / "valid.tsv",
        "--test", root / "splits" / "test.tsv",
        "--targets", root / "data" / "targets.txt",
        "--predictions-out", root / "predictions.tsv",
        "--out", root / "metrics",
    ]) == 0
    metrics = (root / "metrics" / "metrics.tsv").read_text()
    assert metrics.startswith("setting\tmetric\tvalue\n")
    assert "filter\tmrr\t" in metrics
    preds = (root / "predictions.tsv").read_text().strip().split("\n")
    assert preds[0] == "head\trelation\ttail\tscore"
    assert len(preds) > 1

    assert run([
        "explain", "--config", cfg,
        "--checkpoint", root / "model" / "checkpoint",
        "--train", root / "splits" / "train.tsv",
        "--test", root / "splits" / "test.tsv",
        "--targets", root / "data" / "targets.txt",
        "--out", root / "explanations",
    ]) == 0
    exp_lines = (root / "explanations" / "explanations.tsv").read_text().strip().split("\n")
    assert exp_lines[0] == "target\tpath\tlength\talpha\tsupport"
    report = (root / "explanations" / "explanation_report.tsv").read_text()
    assert report.startswith("metric\tvalue\nrecall\t")

    assert run([
        "mine", "--config", cfg,
        "--explanations", root / "explanations" / "explanations.tsv",
        "--train", root / "splits" / "train.tsv",
        "--out", root / "rules",
    ]) == 0
    for name in ("rules_all.tsv", "rules_quality.tsv", "rules_high_quality.tsv"):
        assert (root / "rules" / name).exists()
    all_rules = (root / "rules" / "rules_all.tsv").read_text().strip().split("\n")
    assert len(all_rules) > 1

    assert run([
        "infer", "--config", cfg,
        "--rules", root / "rules" / "rules_quality.tsv",
        "--triples", root / "splits" / "train.tsv",
        "--out", root / "inferred.tsv",
    ]) == 0
    assert (root / "inferred.tsv").exists()


def test_usage_error_exit_code():
    assert main(["split"]) == 1
    assert main(["not-a-command"]) == 1


def test_data_error_exit_code(tmp_path):
    missing = tmp_path / "nope.tsv"
    targets = tmp_path / "targets.txt"
    targets.write_text("rel0\n")
    code = main([
        "split", "--triples", str(missing), "--targets", str(targets),
        "--out", str(tmp_path / "out"),
    ])
    assert code == 2
