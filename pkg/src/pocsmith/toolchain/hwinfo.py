"""Cache geometry discovery.

Merges three sources, preferring sysfs, then getconf, then lscpu, and
records where each level came from. The arithmetic identity
size == line * ways * sets is enforced: a level that cannot satisfy it
(missing fields) is completed when exactly one field is missing and
dropped otherwise.
"""

from __future__ import annotations

import re
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import InfoUnavailable

SYSFS_CACHE = Path("/sys/devices/system/cpu/cpu0/cache")


@dataclass(frozen=True)
class CacheLevel:
    level: int
    kind: str  # Data | Instruction | Unified
    size_bytes: int
    line_bytes: int
    associativity: int
    sets: int
    source: str

    def consistent(self) -> bool:
        return self.size_bytes == self.line_bytes * self.associativity * self.sets


@dataclass
class CacheInfo:
    levels: list[CacheLevel] = field(default_factory=list)

    def find(self, level: int, kind: str | None = None) -> CacheLevel | None:
        for entry in self.levels:
            if entry.level == level and (kind is None or entry.kind == kind):
                return entry
        return None

    def summary(self) -> str:
        lines = []
        for lv in self.levels:
            lines.append(
                f"L{lv.level} {lv.kind}: {lv.size_bytes} B, {lv.line_bytes} B/line, "
                f"{lv.associativity}-way, {lv.sets} sets ({lv.source})"
            )
        return "\n".join(lines)


def _parse_size(text: str) -> int:
    text = text.strip()
    match = re.match(r"^(\d+)\s*([KMG]i?B?)?$", text, re.IGNORECASE)
    if not match:
        raise ValueError(f"unparseable cache size {text!r}")
    value = int(match.group(1))
    unit = (match.group(2) or "").upper()
    if unit.startswith("K"):
        value *= 1024
    elif unit.startswith("M"):
        value *= 1024 * 1024
    elif unit.startswith("G"):
        value *= 1024 * 1024 * 1024
    return value


def _complete(level: int, kind: str, size: int | None, line: int | None,
              ways: int | None, sets: int | None, source: str) -> CacheLevel | None:
    known = [size, line, ways, sets]
    if known.count(None) == 1:
        if size is None:
            size = line * ways * sets
        elif line is None and ways and sets:
            line = size // (ways * sets)
        elif ways is None and line and sets:
            ways = size // (line * sets)
        elif sets is None and line and ways:
            sets = size // (line * ways)
    if None in (size, line, ways, sets) or 0 in (size, line, ways, sets):
        return None
    entry = CacheLevel(level, kind, size, line, ways, sets, source)
    return entry if entry.consistent() else None


def _from_sysfs(root: Path) -> list[CacheLevel]:
    levels = []
    if not root.is_dir():
        return levels
    for index_dir in sorted(root.glob("index*")):
        try:
            level = int((index_dir / "level").read_text().strip())
            kind = (index_dir / "type").read_text().strip()
            size = _parse_size((index_dir / "size").read_text())
            line = int((index_dir / "coherency_line_size").read_text().strip())
            ways = int((index_dir / "ways_of_associativity").read_text().strip())
            sets = int((index_dir / "number_of_sets").read_text().strip())
        except (OSError, ValueError):
            continue
        entry = _complete(level, kind, size, line, ways, sets, "sysfs")
        if entry:
            levels.append(entry)
    return levels


_GETCONF_KEYS = {
    (1, "Data"): ("LEVEL1_DCACHE_SIZE", "LEVEL1_DCACHE_LINESIZE", "LEVEL1_DCACHE_ASSOC"),
    (1, "Instruction"): ("LEVEL1_ICACHE_SIZE", "LEVEL1_ICACHE_LINESIZE", "LEVEL1_ICACHE_ASSOC"),
    (2, "Unified"): ("LEVEL2_CACHE_SIZE", "LEVEL2_CACHE_LINESIZE", "LEVEL2_CACHE_ASSOC"),
    (3, "Unified"): ("LEVEL3_CACHE_SIZE", "LEVEL3_CACHE_LINESIZE", "LEVEL3_CACHE_ASSOC"),
}


def _from_getconf(getconf_output: str | None = None) -> list[CacheLevel]:
    if getconf_output is None:
        if shutil.which("getconf") is None:
            return []
        proc = subprocess.run(["getconf", "-a"], capture_output=True, text=True)
        if proc.returncode != 0:
            return []
        getconf_output = proc.stdout
    values: dict[str, int] = {}
    for line in getconf_output.splitlines():
        parts = line.split()
        if len(parts) == 2 and parts[1].isdigit():
            values[parts[0]] = int(parts[1])
    levels = []
    for (level, kind), (size_key, line_key, assoc_key) in _GETCONF_KEYS.items():
        size = values.get(size_key) or None
        line = values.get(line_key) or None
        ways = values.get(assoc_key) or None
        if size and line and ways:
            sets = size // (line * ways)
            entry = _complete(level, kind, size, line, ways, sets, "getconf")
            if entry:
                levels.append(entry)
    return levels


_LSCPU_CACHE = re.compile(r"^L(\d)(d|i)?\s+cache:\s+(.+)$", re.MULTILINE)


def _from_lscpu(lscpu_output: str | None = None) -> list[CacheLevel]:
    """lscpu only gives totals; kept as a last-resort size hint."""
    if lscpu_output is None:
        if shutil.which("lscpu") is None:
            return []
        proc = subprocess.run(["lscpu"], capture_output=True, text=True)
        if proc.returncode != 0:
            return []
        lscpu_output = proc.stdout
    levels = []
    for match in _LSCPU_CACHE.finditer(lscpu_output):
        level = int(match.group(1))
        kind = {"d": "Data", "i": "Instruction"}.get(match.group(2) or "", "Unified")
        size_text = match.group(3).split("(")[0].strip()
        try:
            size = _parse_size(size_text)
        except ValueError:
            continue
        # Assume 64-byte lines and complete with a common associativity
        # only if that yields a consistent geometry; otherwise skip.
        for ways in (8, 12, 16, 4, 20, 10, 24, 2):
            if size % (64 * ways) == 0:
                entry = _complete(level, kind, size, 64, ways, size // (64 * ways), "lscpu")
                if entry:
                    levels.append(entry)
                    break
    return levels


def hw_info(
    sysfs_root: Path | str | None = None,
    getconf_output: str | None = None,
    lscpu_output: str | None = None,
) -> CacheInfo:
    """Merged cache geometry; raises InfoUnavailable when no source works.

    Test fixtures inject a captured sysfs tree or command output through
    the keyword arguments.
    """
    merged: dict[tuple[int, str], CacheLevel] = {}
    for source in (
        _from_lscpu(lscpu_output) if (lscpu_output or sysfs_root is None) else [],
        _from_getconf(getconf_output) if (getconf_output or sysfs_root is None) else [],
        _from_sysfs(Path(sysfs_root) if sysfs_root else SYSFS_CACHE),
    ):
        for entry in source:
            merged[(entry.level, entry.kind)] = entry  # later sources win
    if not merged:
        raise InfoUnavailable("no cache geometry from sysfs, getconf, or lscpu")
    ordered = sorted(merged.values(), key=lambda e: (e.level, e.kind))
    return CacheInfo(levels=ordered)
