from __future__ import annotations

from pathlib import Path

import pytest

from pocsmith.agents.backends import ScriptedBackend
from pocsmith.corpus import ground_truth, load_manifest
from pocsmith.errors import MalformedModelOutput
from pocsmith.knowledge import AttackVector, Namespace
from pocsmith.knowledge.synthesis import synthesize_document
from pocsmith.runstore import MemoryHub

from conftest import CORPUS_ROOT, SAMPLE_DOC_TEXT, write_fixture


@pytest.fixture(scope="module")
def spectre_gt():
    return ground_truth(load_manifest(CORPUS_ROOT), AttackVector.SPECTRE_V1)


def test_synthesize_document_parses_and_persists(spectre_gt, tmp_path: Path):
    fixture = write_fixture(tmp_path / "synth.jsonl", [
        {"role": "synthesizer", "content": SAMPLE_DOC_TEXT},
    ])
    hub = MemoryHub(tmp_path / "memory_hub")
    ns = Namespace(AttackVector.SPECTRE_V1, "gpt")
    doc = synthesize_document(
        spectre_gt,
        failed_attempts=["int main(void){return 0;}"],
        criteria="leak at least half the secret bytes",
        metric_ids={"M11"},
        backend=ScriptedBackend(fixture),
        namespace=ns,
        hub=hub,
    )
    assert doc.title == "Array/Probe Initialization"
    assert doc.status.value == "Draft"
    assert doc.metric_ids == frozenset({"M11"})
    assert hub.load("gpt", "spectre-v1", {"M11"}).title == "Array/Probe Initialization"


def test_synthesize_document_retries_once(spectre_gt, tmp_path: Path):
    fixture = write_fixture(tmp_path / "synth.jsonl", [
        {"role": "synthesizer", "content": "this is not a structured document"},
        {"role": "synthesizer", "content": SAMPLE_DOC_TEXT},
    ])
    doc = synthesize_document(
        spectre_gt, ["attempt"], "criteria", {"M11"}, ScriptedBackend(fixture),
    )
    assert doc.title == "Array/Probe Initialization"


def test_synthesize_document_fails_after_two_rejections(spectre_gt, tmp_path: Path):
    fixture = write_fixture(tmp_path / "synth.jsonl", [
        {"role": "synthesizer", "content": "junk one"},
        {"role": "synthesizer", "content": "junk two"},
    ])
    with pytest.raises(MalformedModelOutput):
        synthesize_document(
            spectre_gt, ["attempt"], "criteria", {"M11"}, ScriptedBackend(fixture),
        )


def test_synthesize_document_requires_failed_attempts(spectre_gt, tmp_path: Path):
    fixture = write_fixture(tmp_path / "synth.jsonl", [
        {"role": "synthesizer", "content": SAMPLE_DOC_TEXT},
    ])
    with pytest.raises(ValueError):
        synthesize_document(
            spectre_gt, [], "criteria", {"M11"}, ScriptedBackend(fixture),
        )


def test_synthesize_merged_group_single_document(spectre_gt, tmp_path: Path):
    merged_doc = SAMPLE_DOC_TEXT.replace(
        "Array/Probe Initialization", "Timing and Classification"
    )
    fixture = write_fixture(tmp_path / "synth.jsonl", [
        {"role": "synthesizer", "content": merged_doc},
    ])
    doc = synthesize_document(
        spectre_gt, ["attempt"], "criteria", {"M8", "M9"}, ScriptedBackend(fixture),
        namespace=Namespace(AttackVector.SPECTRE_V1, "gpt"),
    )
    assert doc.metric_ids == frozenset({"M8", "M9"})
    assert doc.doc_id == "gpt:spectre-v1:M8+M9"
