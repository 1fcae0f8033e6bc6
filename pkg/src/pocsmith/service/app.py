"""HTTP surface for the review console.

Loopback-only by default (the service launches compiled code); JSON
bodies in and out, plus one SSE stream of run and job state changes.
Mutations funnel through the single-writer stores, and feedback posts
against a document whose unit test is in flight are refused with 409.
"""

from __future__ import annotations

import json
import queue
import threading
from pathlib import Path
from typing import Iterator, Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field

from ..agents.backends import make_backend
from ..errors import BadAnchor, DocumentMissing, SectionMissing
from ..knowledge.catalog import AttackVector
from ..knowledge.documents import (
    DocSection,
    FeedbackInstruction,
    FeedbackKind,
    RagDocument,
    apply_feedback,
    render_document,
)
from ..runstore.hub import MemoryHub
from ..runstore.runs import list_runs, open_run
from ..workflow.state import RunConfig, StageKind
from .events import EventBus, sse_format
from .jobs import JobManager


class FeedbackBody(BaseModel):
    kind: str = Field(pattern="^(ADD|REMOVE|MODIFY)$")
    section: str
    content: str = ""
    anchor: Optional[int] = None
    author: str = ""


def _doc_payload(doc: RagDocument, failed_poc: Optional[str]) -> dict:
    return {
        "doc_id": doc.doc_id,
        "family": doc.namespace.model_family,
        "attack": doc.namespace.attack.value,
        "metric_ids": sorted(doc.metric_ids, key=lambda m: int(m[1:])),
        "title": doc.title,
        "importance": doc.importance,
        "implementation_guidance": list(doc.implementation_guidance),
        "placement_guidance": doc.placement_guidance,
        "revision": doc.revision,
        "status": doc.status.value,
        "rendered": render_document(doc),
        "history": [
            {
                "revision": rev.revision,
                "title": rev.title,
                "importance": rev.importance,
                "implementation_guidance": list(rev.implementation_guidance),
                "placement_guidance": rev.placement_guidance,
            }
            for rev in doc.history
        ],
        "failed_poc": failed_poc,
    }


def create_app(
    workspace: Path | str = Path("."),
    backend_spec: str = "live",
    config: Optional[RunConfig] = None,
) -> FastAPI:
    workspace = Path(workspace)
    hub = MemoryHub(workspace / "memory_hub")
    bus = EventBus()
    base_config = config or RunConfig(
        stage=StageKind.S3_DOC_VALIDATE, workspace_root=workspace, backend_spec=backend_spec
    )
    jobs = JobManager(
        workspace=workspace,
        bus=bus,
        backend_factory=lambda: make_backend(backend_spec, base_config.model_family),
        base_config=base_config,
    )
    feedback_lock = threading.Lock()
    app = FastAPI(title="pocsmith review service")
    app.state.bus = bus
    app.state.jobs = jobs

    # -- runs -----------------------------------------------------------------

    @app.get("/runs")
    def get_runs() -> list[dict]:
        summaries = []
        for run in list_runs(workspace):
            record = run.load_record()
            if record is None:
                continue
            summaries.append(json.loads(record.to_json()))
        return summaries

    @app.get("/runs/{run_id}")
    def get_run(run_id: str, page: int = Query(0, ge=0), page_size: int = Query(200, ge=1, le=1000)) -> dict:
        run = open_run(workspace, run_id)
        if run is None:
            raise HTTPException(404, f"no run {run_id}")
        record = run.load_record()
        events = run.load_transcript()
        start = page * page_size
        return {
            "record": json.loads(record.to_json()) if record else None,
            "transcript": events[start : start + page_size],
            "transcript_total": len(events),
            "page": page,
        }

    @app.get("/runs/{run_id}/report")
    def get_run_report(run_id: str) -> dict:
        run = open_run(workspace, run_id)
        if run is None:
            raise HTTPException(404, f"no run {run_id}")
        report_path = run.reports_dir / "gap_report.json"
        if not report_path.is_file():
            raise HTTPException(404, "run has no gap report")
        return json.loads(report_path.read_text())

    # -- documents --------------------------------------------------------------

    def _latest_failed_poc(attack: AttackVector) -> Optional[str]:
        for run in reversed(list_runs(workspace)):
            record = run.load_record()
            if record is None or record.attack != attack.value:
                continue
            if record.verdict in ("Failure", "Halted"):
                poc_path = run.poc_dir / "poc.c"
                if poc_path.is_file():
                    return poc_path.read_text()
        return None

    @app.get("/documents")
    def get_documents(family: Optional[str] = None, attack: Optional[str] = None) -> list[dict]:
        docs = hub.documents()
        if family:
            docs = [d for d in docs if d.namespace.model_family == family]
        if attack:
            vector = AttackVector.parse(attack)
            docs = [d for d in docs if d.namespace.attack is vector]
        return [
            {
                "doc_id": d.doc_id,
                "family": d.namespace.model_family,
                "attack": d.namespace.attack.value,
                "metric_ids": sorted(d.metric_ids, key=lambda m: int(m[1:])),
                "title": d.title,
                "revision": d.revision,
                "status": d.status.value,
            }
            for d in docs
        ]

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str) -> dict:
        try:
            doc = hub.load_by_id(doc_id)
        except DocumentMissing as exc:
            raise HTTPException(404, str(exc)) from exc
        return _doc_payload(doc, _latest_failed_poc(doc.namespace.attack))

    @app.post("/documents/{doc_id}/feedback")
    def post_feedback(doc_id: str, body: FeedbackBody) -> dict:
        if jobs.running_for(doc_id):
            raise HTTPException(409, "unit test in flight for this document")
        try:
            section = DocSection(body.section)
        except ValueError as exc:
            raise HTTPException(422, f"unknown section {body.section!r}") from exc
        try:
            instruction = FeedbackInstruction(
                kind=FeedbackKind(body.kind),
                section=section,
                content=body.content,
                anchor=body.anchor,
            )
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        with feedback_lock:
            try:
                doc = hub.load_by_id(doc_id)
            except DocumentMissing as exc:
                raise HTTPException(404, str(exc)) from exc
            try:
                revised = apply_feedback(doc, instruction)
            except (SectionMissing, BadAnchor) as exc:
                raise HTTPException(422, str(exc)) from exc
            hub.store(revised)
        bus.publish(
            "document_update",
            {"doc_id": doc_id, "revision": revised.revision, "status": revised.status.value},
        )
        return {"doc_id": doc_id, "revision": revised.revision}

    @app.post("/documents/{doc_id}/unittest")
    def post_unittest(doc_id: str) -> dict:
        try:
            doc = hub.load_by_id(doc_id)
        except DocumentMissing as exc:
            raise HTTPException(404, str(exc)) from exc
        try:
            status = jobs.start(doc)
        except RuntimeError as exc:
            raise HTTPException(409, str(exc)) from exc
        return {"job_id": status.job_id}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str) -> dict:
        status = jobs.get(job_id)
        if status is None:
            raise HTTPException(404, f"no job {job_id}")
        return {
            "job_id": status.job_id,
            "doc_id": status.doc_id,
            "state": status.state,
            "runs_done": status.runs_done,
            "passes_so_far": status.passes_so_far,
            "verdict": status.verdict,
            "error": status.error,
        }

    # -- events -----------------------------------------------------------------

    @app.get("/events")
    def get_events() -> StreamingResponse:
        subscription = bus.subscribe()

        def stream() -> Iterator[str]:
            try:
                while True:
                    try:
                        event_type, payload = subscription.get(timeout=15.0)
                        yield sse_format(event_type, payload)
                    except queue.Empty:
                        yield ": keepalive\n\n"
            finally:
                bus.unsubscribe(subscription)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
