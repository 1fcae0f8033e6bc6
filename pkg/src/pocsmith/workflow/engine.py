"""The stage engine.

Each stage is a small phase machine driven by ``step``, which executes
exactly one node per call: one backend completion, one tool execution,
or one retrieval. Agent turn-loops therefore unfold across steps (the
completion that requests a tool and the tool execution itself are two
nodes), which is what makes the global recursion budget meaningful.

Phase maps:
  s1  generate -> validate -> (gap_profile on trigger | Success)
  s2  patch -> validate -> (synthesize on trigger | Success)
  s3  retrieve -> patch -> validate, five scored phases, 4/5 rule
  s4  generate -> [retrieve -> verify -> (patch)]* -> validate -> refine*
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path
from typing import Any, Optional

from .. import corpus as corpus_mod
from ..agents.backends import ChatBackend
from ..agents.loop import MAX_TOOL_CALLS
from ..agents.messages import AgentRole, Message
from ..agents.prompts import PromptContext, assemble_prompts, validation_instruction
from ..errors import CorpusMissing, UnpricedModel
from ..knowledge.catalog import MetricCatalog, load_catalog
from ..knowledge.documents import (
    DocStatus,
    Namespace,
    RagDocument,
    make_doc_id,
    parse_document,
    render_document,
)
from ..knowledge.markers import AnnotatedPoc, Template, ablate
from ..knowledge.testing import UnitOutcome, verdict_from_passes
from ..ragstore.index import VectorIndex
from ..runstore.costing import compute_cost
from ..runstore.hub import MemoryHub, parse_doc_id
from ..runstore.runs import RunDir, RunRecord, create_run
from ..toolchain.registry import ToolRegistry, build_registry
from ..validation.gaps import GapMode, GapReport, gap_profile
from .state import (
    BudgetDecision,
    Outcome,
    RetrievalState,
    RunConfig,
    RunVerdict,
    StageKind,
    WorkflowState,
    budget_check,
)

_CODE_BLOCK = re.compile(r"```(?:c|cpp|c\+\+)?\s*\n(.*?)```", re.DOTALL)
_VALIDATION = re.compile(r"^\s*VALIDATION:\s*(PASS|FAIL)\b[ \t]*(.*)$", re.MULTILINE)
_METRIC_VERDICT = re.compile(r"^\s*METRIC\s+(M\d+)\s*:\s*(VERIFIED|PATCH)\b", re.MULTILINE)


def extract_code(text: str) -> Optional[str]:
    blocks = _CODE_BLOCK.findall(text)
    return blocks[-1] if blocks else None


def parse_validation(text: str) -> Optional[tuple[bool, str]]:
    hits = _VALIDATION.findall(text)
    if not hits:
        return None
    verdict, detail = hits[-1]
    return verdict == "PASS", detail.strip()


def parse_metric_verdict(text: str) -> Optional[tuple[str, str]]:
    hits = _METRIC_VERDICT.findall(text)
    return (hits[-1][0], hits[-1][1]) if hits else None


@dataclass
class RunReport:
    run_id: str
    verdict: RunVerdict
    state: WorkflowState
    run_dir: Optional[RunDir]
    input_tokens: int
    output_tokens: int
    cost_usd: Optional[Decimal]
    artifacts: dict[str, Any] = field(default_factory=dict)


class WorkflowEngine:
    """Binds one run's collaborators; states flow through, never shared."""

    def __init__(
        self,
        config: RunConfig,
        backend: ChatBackend,
        registry: Optional[ToolRegistry] = None,
        run_dir: Optional[RunDir] = None,
    ):
        self.config = config
        self.backend = backend
        self.catalog: MetricCatalog = load_catalog(config.attack_vector)
        corpus_root = config.corpus_root or corpus_mod.default_corpus_root()
        self.manifest = corpus_mod.load_manifest(corpus_root)
        self.ground_truth: AnnotatedPoc = corpus_mod.ground_truth(
            self.manifest, config.attack_vector
        )
        self.problem_statement = corpus_mod.problem_statement(
            self.manifest, config.attack_vector, config.problem_statement_path
        )
        self.run_dir = run_dir
        self.registry = registry or build_registry(
            run_dir.path if run_dir else Path(config.workspace_root),
            core=config.target_core,
            specialized=config.ablation.specialized_tools,
            corpus_root=self.manifest.root,
            calibration_template=corpus_mod.calibration_template(self.manifest),
            exec_timeout_s=config.exec_timeout_s,
        )
        self.hub = MemoryHub(Path(config.workspace_root) / "memory_hub")
        self.index = VectorIndex(Path(config.workspace_root) / "index")
        self.namespace = Namespace(config.attack_vector, config.model_family)
        # experimental escape hatch: retrieval may read another family's
        # documents, which is known to hurt success rates
        self.retrieval_namespace = Namespace(
            config.attack_vector, config.cross_family or config.model_family
        )
        self.template: Optional[Template] = None
        self.document: Optional[RagDocument] = None
        if config.stage in (StageKind.S2_DOC_GEN, StageKind.S3_DOC_VALIDATE):
            if not config.target_metrics:
                raise CorpusMissing("S2/S3 require target_metrics in the run config")
            template_id, group = self.catalog.template_for(config.target_metrics[0])
            self.template = ablate(self.ground_truth, group, template_id)
        if config.stage is StageKind.S3_DOC_VALIDATE:
            _, group = self.catalog.template_for(config.target_metrics[0])
            self.document = self.hub.load(config.model_family, config.attack_vector, group)
        if config.ablation.rag_enabled and config.stage in (
            StageKind.S3_DOC_VALIDATE,
            StageKind.S4_DEPLOY,
        ):
            # sync the hub into the index; unchanged documents embed nothing
            for doc in self.hub.documents(self.retrieval_namespace):
                self.index.upsert(self.retrieval_namespace, doc)

    # -- state construction ---------------------------------------------------

    def initial_state(self, run_id: str) -> WorkflowState:
        state = WorkflowState(run_id=run_id, stage=self.config.stage)
        if self.config.stage is StageKind.S4_DEPLOY:
            queue = list(self.config.metric_queries) or [
                sorted(group, key=lambda m: int(m[1:]))[0]
                for _, group in self.catalog.template_groups()
            ]
            if self.config.ablation.rag_enabled:
                state.metric_queue = queue
                state.retrieval_status = {m: RetrievalState.PENDING for m in queue}
            state.phase = "generate"
        elif self.config.stage is StageKind.S1_GAP_PROFILE:
            state.phase = "generate"
        elif self.config.stage is StageKind.S2_DOC_GEN:
            state.phase = "patch"
        else:  # S3
            state.phase = "retrieve"
            group = self.document.metric_ids if self.document else set()
            state.retrieval_status = {
                m: RetrievalState.PENDING for m in sorted(group, key=lambda x: int(x[1:]))
            }
        return state

    # -- prompt plumbing -------------------------------------------------------

    def _prompt_context(self) -> PromptContext:
        return PromptContext(
            stage=self.config.stage.value,
            attack=self.config.attack_vector,
            multi_agent=self.config.ablation.multi_agent,
            specialized_tools=self.config.ablation.specialized_tools,
            core=self.config.target_core,
            problem_statement=self.problem_statement,
            template_source=self.template.source if self.template else "",
            metric_ids=tuple(self.config.target_metrics),
        )

    def _dynamic_context(self, state: WorkflowState) -> str:
        parts: list[str] = []
        phase = state.phase
        if phase in ("validate", "final_validate"):
            if not self.config.ablation.multi_agent:
                # single agent self-validates with the reflector's task text
                parts.append(validation_instruction(self._prompt_context()))
            parts.append(f"Candidate source:\n```c\n{state.current_poc or ''}\n```")
        elif phase == "generate" and state.last_validation_detail:
            parts.append(f"Previous validation feedback: {state.last_validation_detail}")
            if state.current_poc:
                parts.append(f"Previous attempt:\n```c\n{state.current_poc}\n```")
        elif phase == "patch" and state.stage in (StageKind.S2_DOC_GEN, StageKind.S3_DOC_VALIDATE):
            if state.retrieved_text:
                parts.append(f"Retrieved guidance document:\n{state.retrieved_text}")
            if state.last_validation_detail:
                parts.append(f"Previous validation feedback: {state.last_validation_detail}")
        elif phase == "verify":
            metric = state.metric_queue[0]
            parts.append(
                f"Metric under review: {metric}. Retrieved guidance:\n{state.retrieved_text or '(none)'}"
            )
            parts.append(f"Current source:\n```c\n{state.current_poc or ''}\n```")
            parts.append(
                f"Answer 'METRIC {metric}: VERIFIED' or 'METRIC {metric}: PATCH' (with the patched code)."
            )
        elif phase == "patch_metric":
            metric = state.metric_queue[0]
            parts.append(
                f"Patch the source so metric {metric} follows the retrieved guidance:\n"
                f"{state.retrieved_text or '(none)'}"
            )
            parts.append(f"Current source:\n```c\n{state.current_poc or ''}\n```")
        elif phase == "refine":
            parts.append(f"Validation failed: {state.last_validation_detail}")
            parts.append(f"Current source:\n```c\n{state.current_poc or ''}\n```")
            parts.append("Revise the PoC to address the failure and emit the full source.")
        elif phase == "gap_profile":
            parts.append("Candidate PoC:\n```c\n" + (state.current_poc or "") + "\n```")
            parts.append("Ground truth:\n```c\n" + self.ground_truth.source + "\n```")
            listing = "\n".join(
                f"{m.id}: {m.name}" for m in self.catalog.templatable()
            )
            parts.append(f"Metric catalog:\n{listing}")
        elif phase == "synthesize":
            parts.append("Ground truth:\n```c\n" + self.ground_truth.source + "\n```")
            parts.append(f"Evaluation criteria:\n{self.problem_statement}")
            attempts = state.current_poc or "(no surviving attempt)"
            parts.append(f"Most recent failed attempt:\n```c\n{attempts}\n```")
        return "\n\n".join(p for p in parts if p)

    def _phase_role(self, state: WorkflowState) -> AgentRole:
        phase = state.phase
        if phase in ("validate", "final_validate"):
            return AgentRole.REFLECTOR if self.config.ablation.multi_agent else AgentRole.PROGRAMMER
        if phase == "gap_profile":
            return AgentRole.GAP_PROFILER
        if phase == "synthesize":
            return AgentRole.SYNTHESIZER
        return AgentRole.PROGRAMMER

    def _begin_turn(self, state: WorkflowState) -> None:
        role = self._phase_role(state)
        base_role = role
        if state.phase in ("validate", "final_validate") and role is AgentRole.PROGRAMMER:
            # single-agent ablation: the programmer self-validates, so the
            # base prompts stay programmer prompts
            system_text, user_text = assemble_prompts(base_role, self._prompt_context())
        elif state.phase in ("verify", "patch_metric", "refine"):
            system_text, user_text = assemble_prompts(AgentRole.PROGRAMMER, self._prompt_context())
        else:
            system_text, user_text = assemble_prompts(role, self._prompt_context())
        dynamic = self._dynamic_context(state)
        if dynamic:
            user_text = user_text + "\n" + dynamic
        state.turn_start = len(state.messages)
        state.turn_calls = 0
        state.active_role = role.value
        context = [Message("system", system_text), Message("user", user_text)]
        state.messages.extend(context)
        state.record_event(
            {"event": "context", "role": role.value, "phase": state.phase,
             "messages": [m.to_event() for m in context]}
        )

    # -- node execution --------------------------------------------------------

    def step(self, state: WorkflowState) -> WorkflowState:
        """Execute exactly one node; returns the successor state."""
        if state.verdict is not None:
            raise ValueError("step on a terminal state")
        ns = state.clone()
        if ns.pending_tool is not None:
            self._node_tool(ns)
        elif ns.phase == "retrieve" or (ns.phase == "retrieve_metric"):
            self._node_retrieval(ns)
        elif ns.phase == "gap_profile" and self.config.gap_mode is GapMode.MARKER_ORACLE:
            self._node_marker_profile(ns)
        else:
            self._node_agent(ns)
        ns.node_count += 1
        decision = budget_check(ns, self.config)
        if decision is BudgetDecision.HALT and ns.verdict is None:
            ns.verdict = RunVerdict(Outcome.HALTED, f"recursion limit {self.config.recursion_limit} reached")
        elif decision is BudgetDecision.ROUTE_TO_GAP_PROFILER and ns.phase not in ("gap_profile",):
            ns.phase = "gap_profile"
            ns.turn_start = -1
            ns.pending_tool = None
        if ns.verdict is not None:
            ns.record_event(
                {"event": "verdict", "outcome": ns.verdict.outcome.value,
                 "detail": ns.verdict.detail, "node_count": ns.node_count}
            )
        return ns

    def _node_tool(self, state: WorkflowState) -> None:
        call = state.pending_tool
        result = self.registry.execute(call.tool_name, call.call_id, call.arguments)
        state.tool_outputs.append(result.to_event())
        message = Message(role="tool", content=result.text, tool_result_for=call.call_id)
        state.messages.append(message)
        state.pending_tool = None
        state.record_event(
            {"event": "node", "index": state.node_count, "kind": "tool",
             "tool": result.to_event()}
        )

    def _node_agent(self, state: WorkflowState) -> None:
        if state.turn_start < 0:
            self._begin_turn(state)
        role = AgentRole(state.active_role)
        context = state.messages[state.turn_start :]
        schemas = [spec.wire_schema() for spec in self.registry.specs()]
        turn = self.backend.complete(context, schemas, role)
        usage = turn.usage
        state.usage.append(
            type(usage)(
                model=usage.model,
                input_tokens=usage.input_tokens,
                output_tokens=usage.output_tokens,
                agent_role=usage.agent_role,
                node_index=state.node_count,
            )
        )
        state.messages.append(turn.message)
        state.turn_calls += 1
        state.record_event(
            {"event": "node", "index": state.node_count, "kind": "agent",
             "role": role.value, "message": turn.message.to_event()}
        )
        call = turn.message.tool_call
        if call is not None and state.turn_calls < MAX_TOOL_CALLS:
            state.pending_tool = call
            return
        if call is not None:
            state.note(f"tool budget exhausted for {role.value} turn; treating as final")
        state.turn_start = -1
        self._finish_turn(state, turn.message)

    def _node_retrieval(self, state: WorkflowState) -> None:
        if state.stage is StageKind.S3_DOC_VALIDATE:
            metric_ids = sorted(self.document.metric_ids, key=lambda m: int(m[1:]))
            metric = metric_ids[0]
        else:
            metric = state.metric_queue[0]
        query = self._metric_query(metric)
        # one document per query, but scan a few candidates for the one
        # covering the metric: near-synonym documents can edge it out of
        # the top slot under the coarse offline embedder
        results = self.index.retrieve(
            self.retrieval_namespace, query, k=max(self.config.retrieval_k, 3)
        )
        if self.config.retrieval_floor is not None:
            results = [r for r in results if r.score >= self.config.retrieval_floor]
        hit_doc: Optional[RagDocument] = None
        for candidate in results:
            _, _, ids = parse_doc_id(candidate.doc_id)
            if metric in ids:
                hit_doc = self.hub.load_by_id(candidate.doc_id)
                break
        event: dict[str, Any] = {
            "event": "node", "index": state.node_count, "kind": "retrieval",
            "metric": metric,
        }
        if hit_doc is None:
            state.note(f"retrieval miss for {metric}")
            event["hit"] = False
            state.record_event(event)
            if state.stage is StageKind.S4_DEPLOY:
                state.metric_queue.pop(0)
                state.phase = "retrieve" if state.metric_queue else "final_validate"
            else:
                state.retrieved_text = None
                state.phase = "patch"
            return
        state.retrieved_text = render_document(hit_doc)
        for mid in hit_doc.metric_ids:
            if state.retrieval_status.get(mid, RetrievalState.PENDING) is RetrievalState.PENDING:
                state.retrieval_status[mid] = RetrievalState.RETRIEVED
        event["hit"] = True
        event["doc_id"] = hit_doc.doc_id
        state.record_event(event)
        state.phase = "verify" if state.stage is StageKind.S4_DEPLOY else "patch"

    def _metric_query(self, metric_id: str) -> str:
        metric = self.catalog.get(metric_id)
        return f"{metric.id} {metric.name}: {metric.description}"

    def _node_marker_profile(self, state: WorkflowState) -> None:
        report = gap_profile(
            state.current_poc or "",
            self.ground_truth,
            self.catalog,
            mode=GapMode.MARKER_ORACLE,
            run_id=state.run_id,
        )
        state.gap_report = report
        # run_id stays out of the event so scripted replays stay byte-identical
        verdict_lines = "\n".join(f"{s.metric_id}: {s.status.value}" for s in report.statuses)
        state.record_event(
            {"event": "node", "index": state.node_count, "kind": "agent",
             "role": AgentRole.GAP_PROFILER.value,
             "message": {"role": "assistant", "content": verdict_lines}}
        )
        state.verdict = RunVerdict(
            Outcome.FAILURE, "knowledge gaps profiled", metric_report=report
        )

    # -- turn completion / phase transitions -----------------------------------

    def _finish_turn(self, state: WorkflowState, message: Message) -> None:
        phase = state.phase
        code = extract_code(message.content)
        if phase in ("generate", "patch", "patch_metric", "refine"):
            if code:
                state.current_poc = code
            if phase == "generate":
                state.phase = "validate" if state.stage is not StageKind.S4_DEPLOY else (
                    "retrieve" if state.metric_queue else "final_validate"
                )
            elif phase == "patch":
                state.phase = "validate"
            elif phase == "patch_metric":
                self._complete_metric(state)
            else:  # refine
                state.phase = "final_validate"
        elif phase in ("validate", "final_validate"):
            self._handle_validation(state, message)
        elif phase == "verify":
            self._handle_verify(state, message, code)
        elif phase == "gap_profile":
            self._handle_model_profile(state, message)
        elif phase == "synthesize":
            self._handle_synthesis(state, message)

    def _handle_validation(self, state: WorkflowState, message: Message) -> None:
        parsed = parse_validation(message.content)
        if parsed is None:
            state.note("validator returned no verdict line; counted as failure")
            passed, detail = False, "no VALIDATION line in response"
        else:
            passed, detail = parsed
        state.last_validation_detail = detail
        if passed:
            if state.stage is StageKind.S3_DOC_VALIDATE:
                self._finish_unit_phase(state, True)
                return
            state.verdict = RunVerdict(Outcome.SUCCESS, detail or "validation passed")
            return
        state.failed_validations += 1
        if state.stage is StageKind.S1_GAP_PROFILE:
            state.phase = "generate"  # budget_check may reroute after this node
        elif state.stage is StageKind.S2_DOC_GEN:
            if state.failed_validations >= self.config.gap_trigger:
                state.phase = "synthesize"
            else:
                state.phase = "patch"
        elif state.stage is StageKind.S3_DOC_VALIDATE:
            state.phase_failures += 1
            if state.phase_failures >= self.config.gap_trigger:
                self._finish_unit_phase(state, False)
            else:
                state.phase = "patch"
        else:  # S4
            state.phase = "refine"

    def _finish_unit_phase(self, state: WorkflowState, passed: bool) -> None:
        state.phase_results.append(passed)
        state.phase_failures = 0
        state.retrieved_text = None
        if len(state.phase_results) >= 5:
            verdict = verdict_from_passes(sum(state.phase_results))
            outcome = (
                Outcome.SUCCESS if verdict.outcome is UnitOutcome.FINALIZED else Outcome.FAILURE
            )
            state.verdict = RunVerdict(
                outcome,
                f"unit test {verdict.passes}/5 -> {verdict.outcome.value}",
            )
        else:
            state.phase = "retrieve"

    def _complete_metric(self, state: WorkflowState) -> None:
        # single metric in flight, so every Retrieved entry belongs to the
        # document just applied (merged docs mark their whole group)
        metric = state.metric_queue.pop(0)
        verified = {metric} | {
            mid for mid, status in state.retrieval_status.items()
            if status is RetrievalState.RETRIEVED
        }
        for mid in verified:
            state.retrieval_status[mid] = RetrievalState.VERIFIED
        state.retrieved_text = None
        state.phase = "retrieve" if state.metric_queue else "final_validate"

    def _handle_verify(self, state: WorkflowState, message: Message, code: Optional[str]) -> None:
        metric = state.metric_queue[0]
        verdict = parse_metric_verdict(message.content)
        if verdict is None:
            state.note(f"no metric verdict for {metric}; treating as PATCH")
            state.phase = "patch_metric"
            return
        _, kind = verdict
        if kind == "VERIFIED":
            self._complete_metric(state)
        elif code:
            state.current_poc = code
            self._complete_metric(state)
        else:
            state.phase = "patch_metric"

    def _handle_model_profile(self, state: WorkflowState, message: Message) -> None:
        try:
            report = gap_profile(
                state.current_poc or "",
                self.ground_truth,
                self.catalog,
                mode=GapMode.MODEL_JUDGED,
                judge_verdict=message.content,
                run_id=state.run_id,
            )
        except Exception as exc:
            state.verdict = RunVerdict(Outcome.FAILURE, f"gap profile unparseable: {exc}")
            return
        state.gap_report = report
        state.verdict = RunVerdict(Outcome.FAILURE, "knowledge gaps profiled", metric_report=report)

    def _handle_synthesis(self, state: WorkflowState, message: Message) -> None:
        state.synth_attempts += 1
        group = frozenset(self.config.target_metrics)
        try:
            doc = parse_document(
                message.content,
                doc_id=make_doc_id(self.namespace, group),
                namespace=self.namespace,
                metric_ids=group,
                status=DocStatus.DRAFT,
            )
        except Exception as exc:
            if state.synth_attempts >= 2:
                state.verdict = RunVerdict(Outcome.FAILURE, f"document synthesis failed twice: {exc}")
            else:
                state.note(f"malformed document ({exc}); retrying synthesis once")
                state.turn_start = -1  # stay in synthesize phase
            return
        state.document_text = render_document(doc)
        self.document = doc
        state.verdict = RunVerdict(Outcome.SUCCESS, "guidance document drafted")

    # -- drivers ---------------------------------------------------------------

    def run(self, state: WorkflowState) -> WorkflowState:
        while state.verdict is None:
            state = self.step(state)
        return state

    def deploy_metric_loop(self, state: WorkflowState, metric_queries: list[str]) -> WorkflowState:
        """Drive only the sequential retrieve->verify->patch cycles."""
        if state.stage is not StageKind.S4_DEPLOY:
            raise ValueError("metric loop is a deployment-stage construct")
        if not self.config.ablation.rag_enabled:
            raise ValueError("metric loop requires retrieval to be enabled")
        state = state.clone()
        state.metric_queue = list(metric_queries)
        for metric in metric_queries:
            state.retrieval_status.setdefault(metric, RetrievalState.PENDING)
        if not state.metric_queue:
            return state
        state.phase = "retrieve"
        state.turn_start = -1
        while state.verdict is None and state.metric_queue:
            state = self.step(state)
        return state


def run_stage(
    config: RunConfig,
    backend: ChatBackend,
    registry: Optional[ToolRegistry] = None,
) -> RunReport:
    """Execute one full stage run and persist its artifacts."""
    run_dir = create_run(config.workspace_root)
    engine = WorkflowEngine(config, backend, registry=registry, run_dir=run_dir)
    state = engine.initial_state(run_dir.run_id)
    started = datetime.now(timezone.utc).isoformat()
    state = engine.run(state)
    for event in state.events:
        run_dir.write_transcript(event)
    run_dir.write_usage(state.usage)
    if state.current_poc:
        (run_dir.poc_dir / "poc.c").write_text(state.current_poc)
    artifacts: dict[str, Any] = {}
    if state.gap_report is not None:
        report_path = run_dir.reports_dir / "gap_report.json"
        report_path.write_text(state.gap_report.to_json())
        artifacts["gap_report"] = state.gap_report
    if config.stage is StageKind.S2_DOC_GEN and engine.document is not None:
        engine.hub.store(engine.document)
        engine.index.upsert(engine.namespace, engine.document)
        artifacts["document"] = engine.document
    if config.stage is StageKind.S3_DOC_VALIDATE:
        passes = sum(state.phase_results)
        artifacts["unit_verdict"] = verdict_from_passes(passes) if len(state.phase_results) >= 5 else None
        if artifacts["unit_verdict"] is not None and engine.document is not None:
            verdict = artifacts["unit_verdict"]
            engine.document.status = (
                DocStatus.FINALIZED if verdict.outcome is UnitOutcome.FINALIZED else DocStatus.UNDER_TEST
            )
            engine.hub.store(engine.document)
    if config.stage is StageKind.S4_DEPLOY and state.current_poc:
        artifacts["final_poc"] = state.current_poc
    input_tokens = sum(u.input_tokens for u in state.usage)
    output_tokens = sum(u.output_tokens for u in state.usage)
    cost = None
    try:
        cost = compute_cost(state.usage, config.price_table)
    except UnpricedModel:
        pass
    ended = datetime.now(timezone.utc).isoformat()
    run_dir.write_record(
        RunRecord(
            run_id=run_dir.run_id,
            stage=config.stage.value,
            attack=config.attack_vector.value,
            model_family=config.model_family,
            started=started,
            ended=ended,
            verdict=state.verdict.outcome.value,
            detail=state.verdict.detail,
            input_tokens=input_tokens,
            output_tokens=output_tokens,
            cost_usd=str(cost) if cost is not None else "",
        )
    )
    return RunReport(
        run_id=run_dir.run_id,
        verdict=state.verdict,
        state=state,
        run_dir=run_dir,
        input_tokens=input_tokens,
        output_tokens=output_tokens,
        cost_usd=cost,
        artifacts=artifacts,
    )


def step(
    state: WorkflowState,
    config: RunConfig,
    backend: ChatBackend,
    registry: Optional[ToolRegistry] = None,
) -> WorkflowState:
    """One-node transition (module-level convenience over a fresh engine)."""
    return WorkflowEngine(config, backend, registry=registry).step(state)
