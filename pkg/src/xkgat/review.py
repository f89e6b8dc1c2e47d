"""Human review service: predictions with explanations, verdicts, export.

Wire format is UTF-8 structured text: records are blank-line separated
blocks of ``key=value`` lines. State is an in-memory queue rebuilt at
startup by replaying an append-only decision log; a decision is
acknowledged only after its log line is flushed, so every acknowledged
verdict survives a restart.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import PlainTextResponse

from xkgat.errors import DataError


@dataclass
class ExplanationRecord:
    path: str  # readable chain, surface form
    alpha: float
    support: int


@dataclass
class Prediction:
    id: str
    head: str
    relation: str
    tail: str
    score: float
    source: str = "model"
    status: str = "pending"
    explanations: list[ExplanationRecord] = field(default_factory=list)


@dataclass
class Decision:
    prediction_id: str
    verdict: str  # "accept" | "reject"
    reviewer: str
    timestamp: float
    elapsed_ms: int


def prediction_id(head: str, relation: str, tail: str) -> str:
    digest = hashlib.sha256(f"{head}\t{relation}\t{tail}".encode("utf-8")).hexdigest()
    return digest[:12]


def _parse_predictions_file(path: str) -> list[Prediction]:
    out: dict[str, Prediction] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header[:3] != ["head", "relation", "tail"]:
            raise DataError(f"{path}: expected a head/relation/tail/score prediction file")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 fields")
            head, relation, tail, score = parts
            pid = prediction_id(head, relation, tail)
            out[pid] = Prediction(
                id=pid, head=head, relation=relation, tail=tail, score=float(score)
            )
    return list(out.values())


def _parse_explanations_file(path: str) -> dict[tuple[str, str, str], list[ExplanationRecord]]:
    out: dict[tuple[str, str, str], list[ExplanationRecord]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("target\t"):
            raise DataError(f"{path}: missing explanation header")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise DataError(f"{path}:{lineno}: expected 5 fields")
            target, chain, _length, alpha, support = parts
            inner = target.strip()
            if not (inner.startswith("(") and inner.endswith(")")):
                raise DataError(f"{path}:{lineno}: malformed target {target!r}")
            triple = tuple(p.strip() for p in inner[1:-1].split(", "))
            if len(triple) != 3:
                raise DataError(f"{path}:{lineno}: malformed target {target!r}")
            out.setdefault(triple, []).append(
                ExplanationRecord(path=chain, alpha=float(alpha), support=int(support))
            )
    return out


class ReviewQueue:
    """Review state: predictions joined with explanations plus the decision log."""

    def __init__(self, predictions_path: str, explanations_path: Optional[str], log_path: str):
        self.log_path = log_path
        self._lock = threading.Lock()
        self.predictions: dict[str, Prediction] = {}
        preds = _parse_predictions_file(predictions_path)
        explanations = (
            _parse_explanations_file(explanations_path) if explanations_path else {}
        )
        for pred in preds:
            records = explanations.get((pred.head, pred.relation, pred.tail), [])
            pred.explanations = sorted(records, key=lambda r: -r.alpha)
            self.predictions[pred.id] = pred
        self.decisions: dict[str, Decision] = {}
        self._replay_log()

    def _replay_log(self) -> None:
        if not os.path.exists(self.log_path):
            return
        with open(self.log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                fields = dict(kv.split("=", 1) for kv in line.split("\t"))
                if fields.get("type") == "reopen":
                    pid = fields["prediction_id"]
                    self.decisions.pop(pid, None)
                    if pid in self.predictions:
                        self.predictions[pid].status = "pending"
                    continue
                decision = Decision(
                    prediction_id=fields["prediction_id"],
                    verdict=fields["verdict"],
                    reviewer=fields.get("reviewer", ""),
                    timestamp=float(fields.get("timestamp", 0)),
                    elapsed_ms=int(fields.get("elapsed_ms", 0)),
                )
                self._apply(decision)

    def _apply(self, decision: Decision) -> None:
        self.decisions[decision.prediction_id] = decision
        pred = self.predictions.get(decision.prediction_id)
        if pred is not None:
            pred.status = "accepted" if decision.verdict == "accept" else "rejected"

    def list_predictions(self, status: Optional[str], page: int, page_size: int):
        if page < 0 or page_size < 1:
            raise DataError("page must be >= 0 and page_size >= 1")
        with self._lock:
            items = [
                p
                for p in self.predictions.values()
                if status is None or p.status == status
            ]
            items.sort(key=lambda p: (p.score, p.id))
            total = len(items)
            start = page * page_size
            return items[start : start + page_size], total

    def record_decision(self, decision: Decision) -> str:
        """Returns 'recorded' or 'duplicate'; raises KeyError / conflict."""
        if decision.verdict not in ("accept", "reject"):
            raise DataError(f"unknown verdict {decision.verdict!r}")
        with self._lock:
            pred = self.predictions.get(decision.prediction_id)
            if pred is None:
                raise KeyError(decision.prediction_id)
            existing = self.decisions.get(decision.prediction_id)
            if existing is not None:
                if existing.verdict == decision.verdict:
                    return "duplicate"
                raise ConflictError(decision.prediction_id)
            line = (
                f"prediction_id={decision.prediction_id}\tverdict={decision.verdict}"
                f"\treviewer={decision.reviewer}\ttimestamp={decision.timestamp:.3f}"
                f"\telapsed_ms={decision.elapsed_ms}"
            )
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._apply(decision)
            return "recorded"

    def export_accepted(self) -> str:
        with self._lock:
            rows = [
                f"{p.head}\t{p.relation}\t{p.tail}\n"
                for p in sorted(self.predictions.values(), key=lambda p: (p.score, p.id))
                if p.status == "accepted"
            ]
        return "".join(rows)

    def stats(self) -> dict:
        with self._lock:
            counts = {"pending": 0, "accepted": 0, "rejected": 0}
            for p in self.predictions.values():
                counts[p.status] += 1
            decided = list(self.decisions.values())
            accepted = sum(1 for d in decided if d.verdict == "accept")
            mean_elapsed = (
                sum(d.elapsed_ms for d in decided) / len(decided) if decided else 0.0
            )
            return {
                "total": len(self.predictions),
                "pending": counts["pending"],
                "accepted": counts["accepted"],
                "rejected": counts["rejected"],
                "decisions": len(decided),
                "accept_rate": accepted / len(decided) if decided else 0.0,
                "mean_elapsed_ms": mean_elapsed,
            }


class ConflictError(Exception):
    pass


# -- wire format -----------------------------------------------------------


def render_prediction(pred: Prediction) -> str:
    lines = [
        f"id={pred.id}",
        f"head={pred.head}",
        f"relation={pred.relation}",
        f"tail={pred.tail}",
        f"score={pred.score:.10g}",
        f"status={pred.status}",
        f"source={pred.source}",
    ]
    for i, rec in enumerate(pred.explanations, start=1):
        lines.append(f"explanation.{i}.path={rec.path}")
        lines.append(f"explanation.{i}.alpha={rec.alpha:.10g}")
        lines.append(f"explanation.{i}.support={rec.support}")
    return "\n".join(lines)


def parse_kv_body(body: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in body.splitlines():
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"malformed body line {line!r}")
        key, value = line.split("=", 1)
        out[key] = value
    return out


def create_app(queue: ReviewQueue, static_dir: Optional[str] = None):
    app = FastAPI()

    @app.get("/api/predictions", response_class=PlainTextResponse)
    def list_predictions(status: Optional[str] = None, page: int = 0, page_size: int = 20):
        try:
            items, total = queue.list_predictions(status, page, page_size)
        except DataError as exc:
            return PlainTextResponse(f"error={exc}", status_code=400)
        blocks = [f"total={total}\npage={page}\npage_size={page_size}"]
        blocks.extend(render_prediction(p) for p in items)
        return "\n\n".join(blocks) + "\n"

    @app.post("/api/decisions", response_class=PlainTextResponse)
    async def post_decision(request: Request):
        body = (await request.body()).decode("utf-8")
        try:
            fields = parse_kv_body(body)
            decision = Decision(
                prediction_id=fields["prediction_id"],
                verdict=fields["verdict"],
                reviewer=fields.get("reviewer", ""),
                timestamp=time.time(),
                elapsed_ms=int(fields.get("elapsed_ms", 0)),
            )
        except (DataError, KeyError, ValueError) as exc:
            return PlainTextResponse(f"error=malformed decision: {exc}", status_code=400)
        try:
            outcome = queue.record_decision(decision)
        except KeyError:
            return PlainTextResponse("error=unknown prediction id", status_code=404)
        except ConflictError:
            return PlainTextResponse("error=already decided", status_code=409)
        except DataError as exc:
            return PlainTextResponse(f"error={exc}", status_code=400)
        return f"status={outcome}\n"

    @app.get("/api/export", response_class=PlainTextResponse)
    def export(format: str = "tsv"):
        if format != "tsv":
            return PlainTextResponse("error=unsupported format", status_code=400)
        return queue.export_accepted()

    @app.get("/api/stats", response_class=PlainTextResponse)
    def stats():
        data = queue.stats()
        return "".join(f"{k}={v}\n" for k, v in data.items())

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
