"""Hardware performance counters via perf stat.

Uses the machine-readable field-separated output mode (``-x,``) for a
stable parse. Counters the kernel or hardware cannot provide come back
with supported=False, never with invented values; a host without perf
reports every counter unsupported.
"""

from __future__ import annotations

import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path

from ..errors import BinaryMissing, EmptyCounterList


@dataclass(frozen=True)
class CounterValue:
    value: int
    supported: bool


@dataclass(frozen=True)
class CounterReport:
    counters: dict[str, CounterValue]

    def summary(self) -> str:
        lines = []
        for name in sorted(self.counters):
            entry = self.counters[name]
            shown = str(entry.value) if entry.supported else "<not supported>"
            lines.append(f"{name}={shown}")
        return "\n".join(lines)


def parse_perf_stat(output: str, requested: list[str]) -> CounterReport:
    """Parse ``perf stat -x,`` CSV lines.

    Fields: value,unit,event,runtime,pct,... Unsupported counters show
    ``<not supported>`` or ``<not counted>`` in the value field.
    """
    found: dict[str, CounterValue] = {}
    for line in output.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) < 3:
            continue
        raw_value, _unit, event = fields[0].strip(), fields[1], fields[2].strip()
        if not event:
            continue
        if raw_value in ("<not supported>", "<not counted>"):
            found[event] = CounterValue(value=0, supported=False)
            continue
        try:
            value = int(float(raw_value))
        except ValueError:
            continue
        found[event] = CounterValue(value=value, supported=True)
    counters = {}
    for name in requested:
        # perf may echo the event with a :u / :k modifier suffix
        hit = found.get(name) or next(
            (v for k, v in found.items() if k.split(":")[0] == name), None
        )
        counters[name] = hit or CounterValue(value=0, supported=False)
    return CounterReport(counters=counters)


def hpc(
    binary_path: Path | str,
    counters: list[str],
    core: int | None = None,
    timeout_s: float = 60.0,
) -> CounterReport:
    """One instrumented execution of the binary under perf stat."""
    if not counters:
        raise EmptyCounterList("select at least one counter")
    binary = Path(binary_path)
    if not binary.is_file():
        raise BinaryMissing(str(binary))
    perf = shutil.which("perf")
    if perf is None:
        return CounterReport(
            counters={name: CounterValue(value=0, supported=False) for name in counters}
        )
    cmd = [perf, "stat", "-x,", "-e", ",".join(counters)]
    if core is not None:
        taskset = shutil.which("taskset")
        if taskset:
            cmd = [taskset, "-c", str(core), *cmd]
    cmd.append(str(binary))
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout_s)
    except subprocess.TimeoutExpired:
        return CounterReport(
            counters={name: CounterValue(value=0, supported=False) for name in counters}
        )
    # perf writes the table to stderr
    return parse_perf_stat(proc.stderr, counters)
