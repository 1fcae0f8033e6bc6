from __future__ import annotations

import json
import shutil
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
CORPUS_ROOT = REPO_ROOT / "corpus"
HUB_ROOT = REPO_ROOT / "memory_hub"

TRIVIAL_C = "int main(void){return 0;}"


@pytest.fixture(scope="session")
def corpus_root() -> Path:
    return CORPUS_ROOT


@pytest.fixture()
def workspace(tmp_path: Path) -> Path:
    """Throwaway workspace seeded with the shipped memory hub."""
    shutil.copytree(HUB_ROOT, tmp_path / "memory_hub")
    return tmp_path


def write_fixture(path: Path, entries: list[dict]) -> Path:
    path.write_text("\n".join(json.dumps(entry) for entry in entries) + "\n")
    return path


def programmer_code(code: str = TRIVIAL_C, note: str = "attempt") -> dict:
    return {"role": "programmer", "content": f"{note}\n```c\n{code}\n```"}


def reflector(passed: bool, detail: str = "") -> dict:
    verdict = "PASS" if passed else "FAIL"
    return {"role": "reflector", "content": f"observed output.\nVALIDATION: {verdict} {detail}".rstrip()}


def s1_entries(candidate: str, fails: int = 8) -> list[dict]:
    entries: list[dict] = []
    for i in range(fails):
        entries.append(programmer_code(candidate, note=f"attempt {i}"))
        entries.append(reflector(False, "no leakage"))
    return entries


def s3_entries(outcomes: list[bool], fails_per_phase: int = 8) -> list[dict]:
    entries: list[dict] = []
    for passed in outcomes:
        if passed:
            entries.append(programmer_code(note="patch"))
            entries.append(reflector(True, "leak 8/15"))
        else:
            for _ in range(fails_per_phase):
                entries.append(programmer_code(note="patch"))
                entries.append(reflector(False, "metric absent"))
    return entries


def never_converge_entries(rounds: int = 60) -> list[dict]:
    """Single-agent generate/fail alternation; one node per entry."""
    entries: list[dict] = []
    for i in range(rounds):
        entries.append(programmer_code(note=f"try {i}"))
        entries.append({"role": "programmer", "content": "VALIDATION: FAIL still nothing"})
    return entries


SAMPLE_DOC_TEXT = """**Title:** Array/Probe Initialization

**Importance:**
The probe array needs a deterministic initial state before any timing.

**Implementation Guidance:**
- Write a fixed value to every element before the attack loop.
- Cover the whole array so no page is left untouched.

**Placement Guidance:**
At the start of the main function, before the attack loop.
"""
