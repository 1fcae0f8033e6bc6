"""Run state, stage identifiers, ablation flags, and budget routing.

A run is bound to one stage for its whole life. State evolves one node
at a time (an agent invocation, a tool execution, or a retrieval each
count as exactly one node), and ``budget_check`` is the pure routing
function over (node_count, failed_validations, stage).
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from ..agents.messages import Message, ToolCall
from ..knowledge.catalog import AttackVector
from ..runstore.costing import PriceTable, UsageRecord
from ..validation.gaps import GapMode, GapReport

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_RECURSION_LIMIT = 100
DEFAULT_GAP_TRIGGER = 8


class StageKind(str, Enum):
    S1_GAP_PROFILE = "s1"
    S2_DOC_GEN = "s2"
    S3_DOC_VALIDATE = "s3"
    S4_DEPLOY = "s4"

    @classmethod
    def parse(cls, text: str) -> "StageKind":
        norm = text.strip().lower()
        aliases = {
            "s1": cls.S1_GAP_PROFILE, "profile": cls.S1_GAP_PROFILE,
            "s2": cls.S2_DOC_GEN, "gen-doc": cls.S2_DOC_GEN,
            "s3": cls.S3_DOC_VALIDATE, "validate-doc": cls.S3_DOC_VALIDATE,
            "s4": cls.S4_DEPLOY, "deploy": cls.S4_DEPLOY,
        }
        if norm not in aliases:
            raise ValueError(f"unknown stage {text!r}")
        return aliases[norm]


@dataclass(frozen=True)
class AblationFlags:
    multi_agent: bool = True
    specialized_tools: bool = True
    rag_enabled: bool = True


# Named design points; generic tools are always on.
ABLATION_PRESETS: dict[str, AblationFlags] = {
    "D1": AblationFlags(multi_agent=False, specialized_tools=True, rag_enabled=False),
    "D2": AblationFlags(multi_agent=False, specialized_tools=True, rag_enabled=True),
    "D3": AblationFlags(multi_agent=True, specialized_tools=False, rag_enabled=True),
    "D4": AblationFlags(multi_agent=True, specialized_tools=True, rag_enabled=True),
}


class Outcome(str, Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"
    HALTED = "Halted"


@dataclass(frozen=True)
class RunVerdict:
    outcome: Outcome
    detail: str = ""
    metric_report: Optional[GapReport] = None


class RetrievalState(str, Enum):
    PENDING = "Pending"
    RETRIEVED = "Retrieved"
    VERIFIED = "Verified"


class BudgetDecision(str, Enum):
    CONTINUE = "Continue"
    ROUTE_TO_GAP_PROFILER = "RouteToGapProfiler"
    HALT = "Halt"


@dataclass
class RunConfig:
    stage: StageKind
    attack_vector: AttackVector = AttackVector.SPECTRE_V1
    model_family: str = "scripted"
    ablation: AblationFlags = field(default_factory=AblationFlags)
    recursion_limit: int = DEFAULT_RECURSION_LIMIT
    gap_trigger: int = DEFAULT_GAP_TRIGGER
    target_core: int = 0
    problem_statement_path: Optional[Path] = None
    price_table: PriceTable = field(default_factory=PriceTable)
    corpus_root: Optional[Path] = None
    workspace_root: Path = Path(".")
    gap_mode: GapMode = GapMode.MARKER_ORACLE
    # S2/S3: the metric group under test; S4: ordered retrieval queries
    # (defaults to one query per template group when left empty).
    target_metrics: tuple[str, ...] = ()
    metric_queries: tuple[str, ...] = ()
    retrieval_k: int = 1
    retrieval_floor: Optional[float] = None
    # experimental: read documents written for another model family.
    # Off by default because foreign-family documents degrade success.
    cross_family: Optional[str] = None
    exec_timeout_s: float = 30.0
    backend_spec: str = "live"

    def __post_init__(self) -> None:
        if self.recursion_limit <= 0:
            raise ValueError("recursion_limit must be positive")
        if self.gap_trigger <= 0:
            raise ValueError("gap_trigger must be positive")
        if self.gap_trigger >= self.recursion_limit:
            raise ValueError("gap_trigger must be below recursion_limit")


def load_run_config(path: Path | str, stage: StageKind | None = None) -> RunConfig:
    """Read the TOML run configuration.

    Recognized keys: stage, attack, model_family, recursion_limit,
    gap_trigger, ablation.{multi_agent,specialized_tools,rag}, core,
    prices.<model>.{input_per_m,output_per_m}, plus corpus_root,
    workspace, problem_statement, target_metrics, metric_queries,
    backend.
    """
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    ablation_raw = raw.get("ablation", {})
    if isinstance(ablation_raw, str):
        ablation = ABLATION_PRESETS[ablation_raw.upper()]
    else:
        ablation = AblationFlags(
            multi_agent=ablation_raw.get("multi_agent", True),
            specialized_tools=ablation_raw.get("specialized_tools", True),
            rag_enabled=ablation_raw.get("rag", ablation_raw.get("rag_enabled", True)),
        )
    return RunConfig(
        stage=stage or StageKind.parse(raw["stage"]),
        attack_vector=AttackVector.parse(raw.get("attack", "spectre-v1")),
        model_family=raw.get("model_family", "scripted"),
        ablation=ablation,
        recursion_limit=raw.get("recursion_limit", DEFAULT_RECURSION_LIMIT),
        gap_trigger=raw.get("gap_trigger", DEFAULT_GAP_TRIGGER),
        target_core=raw.get("core", 0),
        problem_statement_path=Path(raw["problem_statement"]) if "problem_statement" in raw else None,
        price_table=PriceTable.from_mapping(raw.get("prices", {})),
        corpus_root=Path(raw["corpus_root"]) if "corpus_root" in raw else None,
        workspace_root=Path(raw.get("workspace", ".")),
        gap_mode=GapMode(raw.get("gap_mode", "marker")),
        target_metrics=tuple(raw.get("target_metrics", [])),
        metric_queries=tuple(raw.get("metric_queries", [])),
        retrieval_k=raw.get("retrieval_k", 1),
        retrieval_floor=raw.get("retrieval_floor"),
        cross_family=raw.get("cross_family"),
        exec_timeout_s=raw.get("exec_timeout_s", 30.0),
        backend_spec=raw.get("backend", "live"),
    )


@dataclass
class WorkflowState:
    run_id: str
    stage: StageKind
    messages: list[Message] = field(default_factory=list)
    tool_outputs: list[dict] = field(default_factory=list)
    node_count: int = 0
    failed_validations: int = 0
    retrieval_status: dict[str, RetrievalState] = field(default_factory=dict)
    current_poc: Optional[str] = None
    verdict: Optional[RunVerdict] = None

    # engine bookkeeping
    phase: str = "start"
    active_role: str = ""
    pending_tool: Optional[ToolCall] = None
    turn_calls: int = 0
    turn_start: int = -1
    metric_queue: list[str] = field(default_factory=list)
    phase_results: list[bool] = field(default_factory=list)
    phase_failures: int = 0
    synth_attempts: int = 0
    usage: list[UsageRecord] = field(default_factory=list)
    gap_report: Optional[GapReport] = None
    document_text: Optional[str] = None
    retrieved_text: Optional[str] = None
    last_validation_detail: str = ""
    notes: list[str] = field(default_factory=list)
    events: list[dict[str, Any]] = field(default_factory=list)

    def clone(self) -> "WorkflowState":
        return replace(
            self,
            messages=list(self.messages),
            tool_outputs=list(self.tool_outputs),
            retrieval_status=dict(self.retrieval_status),
            metric_queue=list(self.metric_queue),
            phase_results=list(self.phase_results),
            usage=list(self.usage),
            notes=list(self.notes),
            events=copy.deepcopy(self.events),
        )

    def note(self, text: str) -> None:
        self.notes.append(text)

    def record_event(self, event: dict[str, Any]) -> None:
        self.events.append(event)


def budget_check(state: WorkflowState, config: RunConfig) -> BudgetDecision:
    """Pure routing over (node_count, failed_validations, stage).

    The hard node cap always wins a tie; the gap-profiler hand-off fires
    in S1 exactly when the failure count reaches the trigger.
    """
    if state.node_count >= config.recursion_limit:
        return BudgetDecision.HALT
    if (
        state.stage is StageKind.S1_GAP_PROFILE
        and state.failed_validations >= config.gap_trigger
    ):
        return BudgetDecision.ROUTE_TO_GAP_PROFILER
    return BudgetDecision.CONTINUE
