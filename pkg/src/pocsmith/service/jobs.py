"""Background unit-test jobs.

One job per document at a time; progress is persisted to
``workspace/jobs/<job_id>.json`` after every state change so the SSE
stream never carries state that could not be recovered from disk.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

from ..knowledge.documents import DocStatus, RagDocument
from ..knowledge.testing import UnitOutcome, verdict_from_passes
from ..runstore.hub import MemoryHub
from ..workflow.engine import WorkflowEngine
from ..workflow.state import Outcome, RunConfig, StageKind
from .events import EventBus


@dataclass
class JobStatus:
    job_id: str
    doc_id: str
    state: str = "running"  # running | done | error
    runs_done: int = 0
    passes_so_far: int = 0
    verdict: Optional[str] = None
    error: str = ""


@dataclass
class JobManager:
    workspace: Path
    bus: EventBus
    backend_factory: Callable[[], object]
    base_config: RunConfig
    _jobs: dict[str, JobStatus] = field(default_factory=dict)
    _by_doc: dict[str, str] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def _persist(self, status: JobStatus) -> None:
        jobs_dir = self.workspace / "jobs"
        jobs_dir.mkdir(parents=True, exist_ok=True)
        (jobs_dir / f"{status.job_id}.json").write_text(json.dumps(asdict(status), indent=2))

    def _update(self, status: JobStatus) -> None:
        self._persist(status)
        self.bus.publish("job_update", asdict(status))

    def get(self, job_id: str) -> Optional[JobStatus]:
        with self._lock:
            if job_id in self._jobs:
                return self._jobs[job_id]
        path = self.workspace / "jobs" / f"{job_id}.json"
        if path.is_file():
            return JobStatus(**json.loads(path.read_text()))
        return None

    def running_for(self, doc_id: str) -> Optional[str]:
        with self._lock:
            job_id = self._by_doc.get(doc_id)
            if job_id and self._jobs[job_id].state == "running":
                return job_id
        return None

    def start(self, doc: RagDocument) -> JobStatus:
        from dataclasses import replace as dc_replace

        with self._lock:
            active = self._by_doc.get(doc.doc_id)
            if active and self._jobs[active].state == "running":
                raise RuntimeError("unit test already in flight for this document")
            status = JobStatus(job_id=uuid.uuid4().hex[:12], doc_id=doc.doc_id)
            self._jobs[status.job_id] = status
            self._by_doc[doc.doc_id] = status.job_id
        self._update(status)

        config = dc_replace(
            self.base_config,
            stage=StageKind.S3_DOC_VALIDATE,
            attack_vector=doc.namespace.attack,
            model_family=doc.namespace.model_family,
            target_metrics=tuple(sorted(doc.metric_ids, key=lambda m: int(m[1:]))),
        )

        def work() -> None:
            try:
                backend = self.backend_factory()
                from ..runstore.runs import create_run

                run_dir = create_run(config.workspace_root)
                engine = WorkflowEngine(config, backend, run_dir=run_dir)
                state = engine.initial_state(run_dir.run_id)
                runs_done = 0
                while state.verdict is None:
                    state = engine.step(state)
                    if len(state.phase_results) != runs_done:
                        runs_done = len(state.phase_results)
                        status.runs_done = runs_done
                        status.passes_so_far = sum(state.phase_results)
                        self._update(status)
                for event in state.events:
                    run_dir.write_transcript(event)
                run_dir.write_usage(state.usage)
                verdict = verdict_from_passes(sum(state.phase_results))
                if state.verdict.outcome is Outcome.HALTED and len(state.phase_results) < 5:
                    status.error = "node budget halted the batch; unfinished phases count failed"
                doc_after = engine.document
                if doc_after is not None:
                    doc_after.status = (
                        DocStatus.FINALIZED
                        if verdict.outcome is UnitOutcome.FINALIZED
                        else DocStatus.UNDER_TEST
                    )
                    MemoryHub(self.workspace / "memory_hub").store(doc_after)
                status.state = "done"
                status.runs_done = len(state.phase_results)
                status.passes_so_far = verdict.passes
                status.verdict = verdict.outcome.value
            except Exception as exc:  # surfaced through the job record
                status.state = "error"
                status.error = str(exc)
            self._update(status)

        threading.Thread(target=work, daemon=True).start()
        return status
