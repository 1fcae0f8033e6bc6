"""Agent-facing tool registry.

Each tool advertises a name, description, and typed parameters; results
flow back as plain text (truncated to 8 KiB with an explicit sentinel)
plus structured fields. Specialized timing tools and PoC execution
serialize on a per-core mutex so measurements never contend.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from ..errors import PocsmithError

MAX_TOOL_TEXT = 8 * 1024
TRUNCATION_SENTINEL = "\n[... output truncated at 8 KiB ...]"

GENERIC_TOOLS = ("compile", "execute", "read_file", "write_file")
SPECIALIZED_TOOLS = ("hw_info", "cache_thres", "hpc")

_core_locks: dict[int, threading.Lock] = defaultdict(threading.Lock)


def core_lock(core: int) -> threading.Lock:
    return _core_locks[core]


def truncate_text(text: str) -> str:
    if len(text) <= MAX_TOOL_TEXT:
        return text
    return text[:MAX_TOOL_TEXT] + TRUNCATION_SENTINEL


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    parameters: dict[str, str]  # param name -> type name (string/integer/number/array)
    required: tuple[str, ...] = ()

    def wire_schema(self) -> dict:
        """OpenAI-style function schema."""
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": {
                        name: {"type": kind} for name, kind in self.parameters.items()
                    },
                    "required": list(self.required),
                },
            },
        }


@dataclass(frozen=True)
class ToolResult:
    tool_name: str
    call_id: str
    ok: bool
    text: str
    data: dict[str, Any] = field(default_factory=dict)

    def to_event(self) -> dict:
        return {
            "tool": self.tool_name,
            "call_id": self.call_id,
            "ok": self.ok,
            "text": self.text,
            "data": self.data,
        }


class ToolRegistry:
    def __init__(self) -> None:
        self._tools: dict[str, tuple[ToolSpec, Callable[..., ToolResult]]] = {}

    def register(self, spec: ToolSpec, fn: Callable[..., ToolResult]) -> None:
        if spec.name in self._tools:
            raise PocsmithError(f"tool {spec.name!r} already registered")
        self._tools[spec.name] = (spec, fn)

    def specs(self) -> list[ToolSpec]:
        return [spec for spec, _ in self._tools.values()]

    def names(self) -> list[str]:
        return list(self._tools)

    def execute(self, tool_name: str, call_id: str, arguments: dict[str, Any]) -> ToolResult:
        """Run one tool call; unknown tools and tool crashes come back as
        error results for the model, never as raised exceptions."""
        if tool_name not in self._tools:
            return ToolResult(
                tool_name=tool_name,
                call_id=call_id,
                ok=False,
                text=f"error: unknown tool {tool_name!r}; available: {', '.join(self.names())}",
            )
        _, fn = self._tools[tool_name]
        try:
            result = fn(call_id=call_id, **arguments)
        except TypeError as exc:
            return ToolResult(tool_name, call_id, False, f"error: bad arguments: {exc}")
        except Exception as exc:
            return ToolResult(tool_name, call_id, False, f"error: {exc}")
        return result


def _resolve_in(root: Path, raw: str, extra_roots: list[Path]) -> Path:
    """Confine agent file access to the run dir (and read-only extras)."""
    candidate = (root / raw).resolve() if not Path(raw).is_absolute() else Path(raw).resolve()
    for allowed in [root.resolve(), *[r.resolve() for r in extra_roots]]:
        if candidate == allowed or allowed in candidate.parents:
            return candidate
    raise PocsmithError(f"path {raw!r} escapes the run directory")


def build_registry(
    run_dir: Path,
    core: int = 0,
    specialized: bool = True,
    corpus_root: Path | None = None,
    calibration_template: str | None = None,
    exec_timeout_s: float = 30.0,
) -> ToolRegistry:
    """Generic tools always; specialized system tools only when enabled."""
    from . import calibration as cal
    from .compile import compile_source
    from .execute import execute as run_binary
    from .hwinfo import hw_info as read_hw_info
    from .perf_counters import hpc as run_hpc

    registry = ToolRegistry()
    run_dir = Path(run_dir)
    read_roots = [corpus_root] if corpus_root else []

    def tool_compile(call_id: str, source_path: str, language: str = "c") -> ToolResult:
        path = _resolve_in(run_dir, source_path, read_roots)
        result = compile_source(path, language)
        return ToolResult(
            "compile",
            call_id,
            result.ok,
            truncate_text(result.summary()),
            {
                "ok": result.ok,
                "binary_path": str(result.binary_path) if result.binary_path else None,
                "stderr": truncate_text(result.stderr),
                "duration_ms": result.duration_ms,
            },
        )

    def tool_execute(call_id: str, binary_path: str, timeout_s: float | None = None) -> ToolResult:
        path = _resolve_in(run_dir, binary_path, [])
        with core_lock(core):
            result = run_binary(path, core=core, timeout_s=timeout_s or exec_timeout_s)
        text = result.stdout
        if result.stderr:
            text += ("\n[stderr]\n" + result.stderr)
        if result.timed_out:
            text += f"\n[timed out on core {result.core}]"
        return ToolResult(
            "execute",
            call_id,
            result.exit_code == 0,
            truncate_text(text),
            {
                "exit_code": result.exit_code,
                "core": result.core,
                "timed_out": result.timed_out,
                "pinned": result.pinned,
                "duration_ms": result.duration_ms,
                "warning": result.warning,
            },
        )

    def tool_read_file(call_id: str, path: str) -> ToolResult:
        resolved = _resolve_in(run_dir, path, read_roots)
        if not resolved.is_file():
            return ToolResult("read_file", call_id, False, f"error: no such file {path!r}")
        return ToolResult("read_file", call_id, True, truncate_text(resolved.read_text()))

    def tool_write_file(call_id: str, path: str, content: str) -> ToolResult:
        resolved = _resolve_in(run_dir, path, [])
        resolved.parent.mkdir(parents=True, exist_ok=True)
        resolved.write_text(content)
        return ToolResult(
            "write_file", call_id, True, f"wrote {len(content)} bytes to {path}",
            {"path": str(resolved), "bytes": len(content)},
        )

    registry.register(
        ToolSpec(
            "compile",
            "Compile a C or C++ source file inside the run directory with the system compiler.",
            {"source_path": "string", "language": "string"},
            required=("source_path",),
        ),
        tool_compile,
    )
    registry.register(
        ToolSpec(
            "execute",
            "Run a compiled binary pinned to the configured CPU core with a bounded timeout.",
            {"binary_path": "string", "timeout_s": "number"},
            required=("binary_path",),
        ),
        tool_execute,
    )
    registry.register(
        ToolSpec(
            "read_file",
            "Read a text file from the run directory or the attack corpus.",
            {"path": "string"},
            required=("path",),
        ),
        tool_read_file,
    )
    registry.register(
        ToolSpec(
            "write_file",
            "Write a text file inside the run directory.",
            {"path": "string", "content": "string"},
            required=("path", "content"),
        ),
        tool_write_file,
    )

    if not specialized:
        return registry

    def tool_hw_info(call_id: str) -> ToolResult:
        info = read_hw_info()
        return ToolResult(
            "hw_info",
            call_id,
            True,
            truncate_text(info.summary()),
            {
                "levels": [
                    {
                        "level": lv.level,
                        "kind": lv.kind,
                        "size_bytes": lv.size_bytes,
                        "line_bytes": lv.line_bytes,
                        "associativity": lv.associativity,
                        "sets": lv.sets,
                        "source": lv.source,
                    }
                    for lv in info.levels
                ]
            },
        )

    def tool_cache_thres(call_id: str, samples: int = cal.DEFAULT_SAMPLES) -> ToolResult:
        if calibration_template is None:
            return ToolResult("cache_thres", call_id, False, "error: no calibration template configured")
        with core_lock(core):
            result = cal.cache_thres(
                calibration_template, core=core, samples=int(samples), work_dir=run_dir / "calibration"
            )
        return ToolResult(
            "cache_thres",
            call_id,
            True,
            result.summary(),
            {
                "timer": result.timer,
                "flush": result.flush,
                "hit_median_cycles": result.hit_median_cycles,
                "miss_median_cycles": result.miss_median_cycles,
                "threshold_cycles": result.threshold_cycles,
                "samples": result.samples,
            },
        )

    def tool_hpc(call_id: str, binary_path: str, counters: list[str]) -> ToolResult:
        path = _resolve_in(run_dir, binary_path, [])
        with core_lock(core):
            report = run_hpc(path, list(counters), core=core)
        return ToolResult(
            "hpc",
            call_id,
            True,
            truncate_text(report.summary()),
            {
                "counters": {
                    name: {"value": cv.value, "supported": cv.supported}
                    for name, cv in report.counters.items()
                }
            },
        )

    registry.register(
        ToolSpec(
            "hw_info",
            "Report cache geometry (size, line, associativity, sets) per cache level.",
            {},
        ),
        tool_hw_info,
    )
    registry.register(
        ToolSpec(
            "cache_thres",
            "Calibrate the cache hit/miss cycle threshold on the configured core.",
            {"samples": "integer"},
        ),
        tool_cache_thres,
    )
    registry.register(
        ToolSpec(
            "hpc",
            "Run a binary once under perf stat and report the selected hardware counters.",
            {"binary_path": "string", "counters": "array"},
            required=("binary_path", "counters"),
        ),
        tool_hpc,
    )
    return registry
