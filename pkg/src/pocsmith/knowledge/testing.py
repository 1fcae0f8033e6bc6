"""Metric-level unit testing of guidance documents.

A document earns finalization by steering the Programmer-Reflector
testing phase to patch its template in at least four of five runs; the
verdict is a pure function of the pass count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Optional

from .documents import RagDocument
from .markers import Template

if TYPE_CHECKING:  # pragma: no cover
    from ..agents.backends import ChatBackend
    from ..toolchain.registry import ToolRegistry
    from ..workflow.state import RunConfig

RUNS_PER_TEST = 5
PASSES_TO_FINALIZE = 4


class UnitOutcome(str, Enum):
    FINALIZED = "Finalized"
    REFINE = "Refine"


@dataclass(frozen=True)
class UnitTestVerdict:
    passes: int
    outcome: UnitOutcome

    def __post_init__(self) -> None:
        if not 0 <= self.passes <= RUNS_PER_TEST:
            raise ValueError(f"passes must be in 0..{RUNS_PER_TEST}")
        expected = UnitOutcome.FINALIZED if self.passes >= PASSES_TO_FINALIZE else UnitOutcome.REFINE
        if self.outcome is not expected:
            raise ValueError(f"outcome {self.outcome} inconsistent with passes={self.passes}")


def verdict_from_passes(passes: int) -> UnitTestVerdict:
    outcome = UnitOutcome.FINALIZED if passes >= PASSES_TO_FINALIZE else UnitOutcome.REFINE
    return UnitTestVerdict(passes=passes, outcome=outcome)


def unit_test(
    template: Template,
    doc: RagDocument,
    config: "RunConfig",
    backend: "ChatBackend",
    registry: Optional["ToolRegistry"] = None,
) -> UnitTestVerdict:
    """Run the five-phase validation batch for one document.

    Phase failures (including run-level errors inside a phase) count as
    failed runs; the batch itself always completes unless the global
    node budget halts the run, in which case unfinished phases count as
    failures.
    """
    from ..runstore.hub import MemoryHub
    from ..workflow.engine import run_stage
    from ..workflow.state import StageKind

    ids = sorted(doc.metric_ids, key=lambda m: int(m[1:]))
    run_config = replace(
        config,
        stage=StageKind.S3_DOC_VALIDATE,
        target_metrics=tuple(ids),
        attack_vector=doc.namespace.attack,
        model_family=doc.namespace.model_family,
    )
    MemoryHub(run_config.workspace_root / "memory_hub").store(doc)
    report = run_stage(run_config, backend, registry=registry)
    verdict = report.artifacts.get("unit_verdict")
    if verdict is None:
        # budget halted mid-batch: completed phases stand, the rest fail
        verdict = verdict_from_passes(sum(report.state.phase_results))
    return verdict
