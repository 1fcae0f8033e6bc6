from .engine import RunReport, WorkflowEngine, extract_code, parse_validation, run_stage, step
from .state import (
    ABLATION_PRESETS,
    DEFAULT_GAP_TRIGGER,
    DEFAULT_RECURSION_LIMIT,
    AblationFlags,
    BudgetDecision,
    Outcome,
    RetrievalState,
    RunConfig,
    RunVerdict,
    StageKind,
    WorkflowState,
    budget_check,
    load_run_config,
)

__all__ = [
    "RunReport",
    "WorkflowEngine",
    "extract_code",
    "parse_validation",
    "run_stage",
    "step",
    "ABLATION_PRESETS",
    "DEFAULT_GAP_TRIGGER",
    "DEFAULT_RECURSION_LIMIT",
    "AblationFlags",
    "BudgetDecision",
    "Outcome",
    "RetrievalState",
    "RunConfig",
    "RunVerdict",
    "StageKind",
    "WorkflowState",
    "budget_check",
    "load_run_config",
]
