import time

import pytest
from fastapi.testclient import TestClient

from xkgat.errors import DataError
from xkgat.review import (
    ConflictError,
    Decision,
    Prediction,
    ReviewQueue,
    create_app,
    parse_kv_body,
    prediction_id,
    render_prediction,
)

PREDICTIONS = """head\trelation\ttail\tscore
item1\tsuitableFor\tMiddleAge\t0.5
item2\tsuitableFor\tMiddleAge\t1.5
item3\tbrandIs\tAcme\t0.25
"""

EXPLANATIONS = """target\tpath\tlength\talpha\tsupport
(item1, suitableFor, MiddleAge)\t(item1, SleeveStyle, Normal)\t1\t0.61\t30
(item1, suitableFor, MiddleAge)\t(item1, material, Cotton)\t1\t0.82\t12
"""


@pytest.fixture
def queue(tmp_path):
    preds = tmp_path / "predictions.tsv"
    preds.write_text(PREDICTIONS)
    exps = tmp_path / "explanations.tsv"
    exps.write_text(EXPLANATIONS)
    log = tmp_path / "decisions.log"
    return ReviewQueue(str(preds), str(exps), str(log))


def decide(pid, verdict, reviewer="r1"):
    return Decision(
        prediction_id=pid,
        verdict=verdict,
        reviewer=reviewer,
        timestamp=time.time(),
        elapsed_ms=1200,
    )


def test_join_and_alpha_ordering(queue):
    pid = prediction_id("item1", "suitableFor", "MiddleAge")
    pred = queue.predictions[pid]
    assert [r.alpha for r in pred.explanations] == [0.82, 0.61]
    other = prediction_id("item3", "brandIs", "Acme")
    assert queue.predictions[other].explanations == []


def test_list_sorted_by_score_then_paged(queue):
    items, total = queue.list_predictions(None, page=0, page_size=2)
    assert total == 3
    assert [p.head for p in items] == ["item3", "item1"]
    items2, _ = queue.list_predictions(None, page=1, page_size=2)
    assert [p.head for p in items2] == ["item2"]


def test_decision_lifecycle_and_conflicts(queue):
    pid = prediction_id("item1", "suitableFor", "MiddleAge")
    assert queue.record_decision(decide(pid, "accept")) == "recorded"
    assert queue.predictions[pid].status == "accepted"
    assert queue.record_decision(decide(pid, "accept")) == "duplicate"
    with pytest.raises(ConflictError):
        queue.record_decision(decide(pid, "reject"))
    with pytest.raises(KeyError):
        queue.record_decision(decide("doesnotexist", "accept"))
    with pytest.raises(DataError):
        queue.record_decision(decide(pid, "maybe"))


def test_log_replay_restores_state(tmp_path, queue):
    a = prediction_id("item1", "suitableFor", "MiddleAge")
    b = prediction_id("item2", "suitableFor", "MiddleAge")
    queue.record_decision(decide(a, "accept"))
    queue.record_decision(decide(b, "reject"))
    revived = ReviewQueue(
        str(tmp_path / "predictions.tsv"),
        str(tmp_path / "explanations.tsv"),
        str(tmp_path / "decisions.log"),
    )
    assert revived.predictions[a].status == "accepted"
    assert revived.predictions[b].status == "rejected"
    assert revived.stats()["decisions"] == 2


def test_export_accepted_only(queue):
    a = prediction_id("item1", "suitableFor", "MiddleAge")
    queue.record_decision(decide(a, "accept"))
    out = queue.export_accepted()
    assert out == "item1\tsuitableFor\tMiddleAge\n"


def test_render_and_parse_wire_format(queue):
    pid = prediction_id("item1", "suitableFor", "MiddleAge")
    text = render_prediction(queue.predictions[pid])
    fields = parse_kv_body(text)
    assert fields["head"] == "item1"
    assert fields["explanation.1.alpha"] == "0.82"
    assert fields["explanation.2.support"] == "30"
    with pytest.raises(DataError):
        parse_kv_body("no equals sign here")


def test_http_endpoints(queue):
    client = TestClient(create_app(queue))

    resp = client.get("/api/predictions")
    assert resp.status_code == 200
    blocks = resp.text.strip().split("\n\n")
    assert blocks[0].startswith("total=3")
    assert len(blocks) == 4

    pid = prediction_id("item3", "brandIs", "Acme")
    resp = client.post("/api/decisions", content=f"prediction_id={pid}\nverdict=accept\n")
    assert resp.status_code == 200 and resp.text == "status=recorded\n"

    # duplicate same-verdict is acknowledged, contradiction is refused
    resp = client.post("/api/decisions", content=f"prediction_id={pid}\nverdict=accept\n")
    assert resp.status_code == 200 and "duplicate" in resp.text
    resp = client.post("/api/decisions", content=f"prediction_id={pid}\nverdict=reject\n")
    assert resp.status_code == 409
    resp = client.post("/api/decisions", content="prediction_id=zzz\nverdict=accept\n")
    assert resp.status_code == 404
    resp = client.post("/api/decisions", content="verdict=accept\n")
    assert resp.status_code == 400

    resp = client.get("/api/export", params={"format": "tsv"})
    assert resp.text == "item3\tbrandIs\tAcme\n"
    assert client.get("/api/export", params={"format": "xml"}).status_code == 400

    stats = parse_kv_body(client.get("/api/stats").text)
    assert stats["total"] == "3"
    assert stats["accepted"] == "1"
    assert stats["pending"] == "2"

    resp = client.get("/api/predictions", params={"status": "pending"})
    assert "total=2" in resp.text
