from .calibration import (
    AARCH64,
    X86_64,
    CalibrationResult,
    IsaProfile,
    cache_thres,
    derive_threshold,
    host_isa,
    instantiate_calibration,
    parse_calibration_output,
)
from .compile import CompileResult, compile_source
from .execute import ExecResult, execute
from .hwinfo import CacheInfo, CacheLevel, hw_info
from .perf_counters import CounterReport, CounterValue, hpc, parse_perf_stat
from .registry import (
    GENERIC_TOOLS,
    MAX_TOOL_TEXT,
    SPECIALIZED_TOOLS,
    TRUNCATION_SENTINEL,
    ToolRegistry,
    ToolResult,
    ToolSpec,
    build_registry,
    truncate_text,
)

__all__ = [
    "AARCH64",
    "X86_64",
    "CalibrationResult",
    "IsaProfile",
    "cache_thres",
    "derive_threshold",
    "host_isa",
    "instantiate_calibration",
    "parse_calibration_output",
    "CompileResult",
    "compile_source",
    "ExecResult",
    "execute",
    "CacheInfo",
    "CacheLevel",
    "hw_info",
    "CounterReport",
    "CounterValue",
    "hpc",
    "parse_perf_stat",
    "GENERIC_TOOLS",
    "MAX_TOOL_TEXT",
    "SPECIALIZED_TOOLS",
    "TRUNCATION_SENTINEL",
    "ToolRegistry",
    "ToolResult",
    "ToolSpec",
    "build_registry",
    "truncate_text",
]
