"""Pinned execution with a bounded timeout.

Binaries run under the OS affinity launcher (taskset) on a fixed core;
when pinning is unavailable the run proceeds unpinned with a recorded
warning rather than failing, since timing-insensitive tool calls still
need their output.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

from ..errors import BinaryMissing

KILL_GRACE_S = 1.0


@dataclass(frozen=True)
class ExecResult:
    exit_code: int
    stdout: str
    stderr: str
    duration_ms: float
    core: int
    timed_out: bool
    pinned: bool
    warning: str = ""


def _pin_prefix(core: int) -> tuple[list[str], str]:
    taskset = shutil.which("taskset")
    if taskset is None:
        return [], "taskset unavailable; running unpinned"
    cpu_count = os.cpu_count() or 1
    if core >= cpu_count:
        return [], f"core {core} >= cpu count {cpu_count}; running unpinned"
    return [taskset, "-c", str(core)], ""


def execute(
    binary_path: Path | str,
    core: int = 0,
    timeout_s: float = 30.0,
    args: list[str] | None = None,
) -> ExecResult:
    binary = Path(binary_path)
    if not binary.is_file() or not os.access(binary, os.X_OK):
        raise BinaryMissing(f"{binary} is not an executable file")
    prefix, warning = _pin_prefix(core)
    cmd = [*prefix, str(binary), *(args or [])]
    started = time.monotonic()
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout_s)
        duration_ms = (time.monotonic() - started) * 1000.0
        return ExecResult(
            exit_code=proc.returncode,
            stdout=proc.stdout,
            stderr=proc.stderr,
            duration_ms=duration_ms,
            core=core,
            timed_out=False,
            pinned=not warning,
            warning=warning,
        )
    except subprocess.TimeoutExpired as exc:
        duration_ms = (time.monotonic() - started) * 1000.0
        stdout = exc.stdout.decode() if isinstance(exc.stdout, bytes) else (exc.stdout or "")
        stderr = exc.stderr.decode() if isinstance(exc.stderr, bytes) else (exc.stderr or "")
        return ExecResult(
            exit_code=-9,
            stdout=stdout,
            stderr=stderr,
            duration_ms=duration_ms,
            core=core,
            timed_out=True,
            pinned=not warning,
            warning=warning or f"killed after {timeout_s}s",
        )
