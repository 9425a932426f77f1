"""HTTP review service: serves the NEEDS_REVIEW queue and persists
adjudication decisions through the record store.

Single-node, file-backed; reviewer identity is a free-form name plus a
shared secret passed in the ``X-Review-Secret`` header.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Header, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import IllegalTransition, VersionConflict
from .tokenization import tokenize
from .validation import DECISIONS, RecordStore, Status, ValidationRecord


class DecisionBody(BaseModel):
    id: str
    decision: str
    expected_version: int
    reviewer: str
    manually_derived_correct: str | None = None
    reviewer_note: str | None = None


def _machine_highlight(record: ValidationRecord) -> list[int]:
    """Token indices in the machine reference matching the phenomenon material."""
    if record.phenomenon_spans is None:
        return []
    correct_tokens = tokenize(record.human_correct).tokens
    contrastive_tokens = tokenize(record.human_contrastive).tokens
    key_tokens = set()
    for start, end in record.phenomenon_spans.correct:
        key_tokens.update(correct_tokens[start:end])
    for start, end in record.phenomenon_spans.contrastive:
        key_tokens.update(contrastive_tokens[start:end])
    machine_tokens = tokenize(record.machine_reference).tokens
    return [i for i, t in enumerate(machine_tokens) if t in key_tokens]


def _queue_item(record: ValidationRecord) -> dict:
    spans = record.phenomenon_spans.to_json() if record.phenomenon_spans else None
    return {
        "id": record.id,
        "error_type": record.error_type,
        "source": record.source,
        "human_correct": record.human_correct,
        "human_contrastive": record.human_contrastive,
        "machine_reference": record.machine_reference,
        "phenomenon_spans": spans,
        "machine_highlight": _machine_highlight(record),
        "version": record.version,
    }


def create_app(store: RecordStore, secret: str,
               static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="minpair review service")

    @app.get("/api/queue")
    def queue(cursor: str = "", limit: int = 20):
        pending = [r for r in store.pending() if r.id > cursor]
        page = pending[:max(1, limit)]
        next_cursor = page[-1].id if len(page) < len(pending) and page else None
        return {"items": [_queue_item(r) for r in page], "next_cursor": next_cursor}

    @app.get("/api/stats")
    def stats():
        return {
            "by_error_type": store.stats(),
            "by_status": store.status_counts(),
            "pending": len(store.pending()),
            "total": len(store.records()),
        }

    @app.post("/api/decisions")
    def decide(body: DecisionBody,
               x_review_secret: str = Header(default="")):
        if x_review_secret != secret:
            raise HTTPException(status_code=401, detail="bad or missing review secret")
        if body.decision not in DECISIONS:
            raise HTTPException(status_code=422, detail=f"unknown decision {body.decision!r}")
        if store.get(body.id) is None:
            raise HTTPException(status_code=404, detail=f"unknown record id {body.id!r}")
        try:
            record = store.apply(
                body.id, body.decision, body.expected_version,
                reviewer=body.reviewer,
                manually_derived_correct=body.manually_derived_correct,
                reviewer_note=body.reviewer_note,
            )
        except VersionConflict as e:
            current = store.get(body.id)
            return JSONResponse(status_code=409, content={
                "error": str(e),
                "current_version": current.version if current else None,
                "current_status": current.status.value if current else None,
            })
        except IllegalTransition as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"id": record.id, "status": record.status.value, "version": record.version}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
