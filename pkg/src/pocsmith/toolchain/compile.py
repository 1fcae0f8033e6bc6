"""Compile tool: gcc for C, g++ for C++.

Artifacts stay inside the run directory; stderr is captured verbatim so
agents see the real diagnostics.
"""

from __future__ import annotations

import shutil
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

from ..errors import ToolchainMissing

DEFAULT_FLAGS = ["-O0", "-Wall"]


@dataclass(frozen=True)
class CompileResult:
    ok: bool
    binary_path: Path | None
    stderr: str
    duration_ms: float

    def summary(self) -> str:
        if self.ok:
            return f"compiled ok -> {self.binary_path}"
        return f"compile failed:\n{self.stderr}"


def _compiler_for(language: str) -> str:
    language = language.lower()
    if language in ("c",):
        name = "gcc"
    elif language in ("c++", "cpp", "cxx"):
        name = "g++"
    else:
        raise ValueError(f"unsupported language {language!r}")
    path = shutil.which(name)
    if path is None:
        raise ToolchainMissing(f"{name} not found on PATH")
    return path


def compile_source(
    source_path: Path | str,
    language: str = "c",
    output_path: Path | str | None = None,
    extra_flags: list[str] | None = None,
) -> CompileResult:
    source = Path(source_path)
    if not source.is_file():
        raise FileNotFoundError(source)
    output = Path(output_path) if output_path else source.with_suffix("")
    compiler = _compiler_for(language)
    cmd = [compiler, *DEFAULT_FLAGS, *(extra_flags or []), str(source), "-o", str(output)]
    started = time.monotonic()
    proc = subprocess.run(cmd, capture_output=True, text=True)
    duration_ms = (time.monotonic() - started) * 1000.0
    ok = proc.returncode == 0 and output.is_file()
    return CompileResult(
        ok=ok,
        binary_path=output if ok else None,
        stderr=proc.stderr,
        duration_ms=duration_ms,
    )
