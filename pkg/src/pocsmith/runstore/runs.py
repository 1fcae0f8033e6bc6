"""Run directories, transcripts, and run records.

Every run owns one directory:

    runs/<run_id>/poc/               generated sources and binaries
    runs/<run_id>/reports/           gap/validation reports
    runs/<run_id>/transcript.jsonl   append-only event log (no clock data,
                                     so a scripted replay is byte-identical)
    runs/<run_id>/usage.json         [{model, input_tokens, output_tokens,
                                       agent_role, node_index}]

Wall-clock timing lives only in run_record.json.
"""

from __future__ import annotations

import json
import os
import secrets
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path

from ..errors import CorruptTranscript, WorkspaceUnwritable
from .costing import PriceTable, UsageRecord, compute_cost


def mint_run_id(now: datetime | None = None) -> str:
    stamp = (now or datetime.now(timezone.utc)).strftime("%Y%m%dT%H%M%S")
    return f"{stamp}-{secrets.token_hex(2)}"


@dataclass
class RunRecord:
    run_id: str
    stage: str
    attack: str
    model_family: str
    started: str
    ended: str = ""
    verdict: str = ""
    detail: str = ""
    input_tokens: int = 0
    output_tokens: int = 0
    cost_usd: str = "0.00"

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))


class RunDir:
    """Handle on one run's directory; the only writer for that run."""

    def __init__(self, path: Path):
        self.path = path
        self.run_id = path.name

    @property
    def poc_dir(self) -> Path:
        return self.path / "poc"

    @property
    def reports_dir(self) -> Path:
        return self.path / "reports"

    @property
    def transcript_path(self) -> Path:
        return self.path / "transcript.jsonl"

    @property
    def usage_path(self) -> Path:
        return self.path / "usage.json"

    def write_transcript(self, event: dict) -> None:
        with open(self.transcript_path, "a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def load_transcript(self) -> list[dict]:
        if not self.transcript_path.is_file():
            return []
        events = []
        for lineno, line in enumerate(self.transcript_path.read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CorruptTranscript(f"{self.transcript_path}:{lineno}: {exc}") from exc
        return events

    def write_usage(self, usage: list[UsageRecord]) -> None:
        payload = [
            {
                "model": u.model,
                "input_tokens": u.input_tokens,
                "output_tokens": u.output_tokens,
                "agent_role": u.agent_role,
                "node_index": u.node_index,
            }
            for u in usage
        ]
        self.usage_path.write_text(json.dumps(payload, indent=2))

    def load_usage(self) -> list[UsageRecord]:
        if not self.usage_path.is_file():
            return []
        return [UsageRecord(**entry) for entry in json.loads(self.usage_path.read_text())]

    def write_record(self, record: RunRecord) -> None:
        (self.path / "run_record.json").write_text(record.to_json())

    def load_record(self) -> RunRecord | None:
        path = self.path / "run_record.json"
        if not path.is_file():
            return None
        return RunRecord.from_json(path.read_text())

    def cost(self, prices: PriceTable) -> Decimal:
        return compute_cost(self.load_usage(), prices)


def create_run(workspace: Path | str, run_id: str | None = None) -> RunDir:
    """Create runs/<run_id>/{poc,reports,transcript.jsonl,usage.json}.

    A colliding run_id is re-minted rather than reused; existing runs are
    never overwritten.
    """
    runs_root = Path(workspace) / "runs"
    try:
        runs_root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise WorkspaceUnwritable(str(exc)) from exc
    if not os.access(runs_root, os.W_OK):
        raise WorkspaceUnwritable(f"{runs_root} is not writable")

    attempt = run_id or mint_run_id()
    while True:
        path = runs_root / attempt
        try:
            path.mkdir()
            break
        except FileExistsError:
            attempt = mint_run_id()
    run = RunDir(path)
    run.poc_dir.mkdir()
    run.reports_dir.mkdir()
    run.transcript_path.touch()
    run.usage_path.write_text("[]")
    return run


def list_runs(workspace: Path | str) -> list[RunDir]:
    runs_root = Path(workspace) / "runs"
    if not runs_root.is_dir():
        return []
    return [RunDir(p) for p in sorted(runs_root.iterdir()) if p.is_dir()]


def open_run(workspace: Path | str, run_id: str) -> RunDir | None:
    path = Path(workspace) / "runs" / run_id
    return RunDir(path) if path.is_dir() else None
