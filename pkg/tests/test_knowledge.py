from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, strategies as st

from pocsmith.errors import (
    BadAnchor,
    DuplicateMetric,
    MalformedModelOutput,
    MetricNotFound,
    SectionMissing,
    UnbalancedMarker,
)
from pocsmith.knowledge import (
    AttackVector,
    DocSection,
    DocStatus,
    FeedbackInstruction,
    FeedbackKind,
    Namespace,
    RagDocument,
    ablate,
    apply_feedback,
    load_catalog,
    make_doc_id,
    parse_document,
    parse_markers,
    render_document,
    splice,
)
from pocsmith.knowledge.markers import AnnotatedPoc
from pocsmith.corpus import ground_truth, load_manifest

from conftest import CORPUS_ROOT


# --- catalog -----------------------------------------------------------------

def test_catalogs_have_disjoint_id_ranges():
    spectre = load_catalog(AttackVector.SPECTRE_V1)
    pp = load_catalog(AttackVector.PRIME_PROBE)
    spectre_ids = {m.number for m in spectre.metrics}
    pp_ids = {m.number for m in pp.metrics}
    assert spectre_ids == set(range(1, 12))
    assert pp_ids == set(range(12, 20))
    assert not spectre_ids & pp_ids


def test_merged_template_groups_follow_catalog():
    spectre = load_catalog(AttackVector.SPECTRE_V1)
    groups = dict(spectre.template_groups())
    assert groups["T8"] == frozenset({"M8", "M9"})
    assert groups["T11"] == frozenset({"M11"})
    assert len(groups) == 8  # nine templatable metrics, one merged pair
    pp = load_catalog(AttackVector.PRIME_PROBE)
    pp_groups = dict(pp.template_groups())
    assert pp_groups["T12"] == frozenset({"M13", "M14"})
    assert len(pp_groups) == 6


def test_problem_statement_metrics_never_templated():
    spectre = load_catalog(AttackVector.SPECTRE_V1)
    templatable = {m.id for m in spectre.templatable()}
    assert "M1" not in templatable and "M2" not in templatable


# --- markers -------------------------------------------------------------------

M11_LISTING = """int main() {
  size_t mal_x = (size_t)(secret - (char *)array1);
  int i, score[2], Length = strlen(secret);
  uint8_t value[2];
  /* M11: Array/Probe Initialization */
  for (i = 0; i < sizeof(array2); i++){
    array2[i] = 1;
  }
  /***********************************/
  printf("Reading bytes\\n");
  return (0);
}
"""


def test_parse_markers_m11_listing():
    spans = parse_markers(M11_LISTING)
    assert len(spans) == 1
    span = spans[0]
    assert span.metric_id == "M11"
    assert span.name == "Array/Probe Initialization"
    body = M11_LISTING.splitlines()[span.open_line + 1 : span.close_line]
    assert any("array2[i] = 1;" in line for line in body)


def test_parse_markers_empty_source():
    assert parse_markers("int main(void){return 0;}\n") == []


def test_parse_markers_unbalanced():
    with pytest.raises(UnbalancedMarker):
        parse_markers("/* M3: Thing */\nint x;\n")
    with pytest.raises(UnbalancedMarker):
        parse_markers("int x;\n/*********/\n")
    with pytest.raises(UnbalancedMarker):
        parse_markers("/* M3: A */\n/* M4: B */\nx;\n/*********/\n/*********/\n")


def test_parse_markers_duplicate():
    source = "/* M3: A */\nx;\n/*********/\n/* M3: A */\ny;\n/*********/\n"
    with pytest.raises(DuplicateMetric):
        parse_markers(source)


def test_ablate_banner_and_roundtrip():
    poc = AnnotatedPoc(AttackVector.SPECTRE_V1, M11_LISTING)
    template = ablate(poc, {"M11"}, "T11")
    assert "/* Excluding M11: Array/Probe Initialization */" in template.source
    assert "array2[i] = 1;" not in template.source
    assert splice(template, poc) == poc.source


def test_ablate_unknown_metric():
    poc = AnnotatedPoc(AttackVector.SPECTRE_V1, M11_LISTING)
    with pytest.raises(MetricNotFound):
        ablate(poc, {"M4"}, "T4")


def test_ablate_preserves_untargeted_lines():
    manifest = load_manifest(CORPUS_ROOT)
    gt = ground_truth(manifest, AttackVector.SPECTRE_V1)
    spans = {s.metric_id: s for s in parse_markers(gt.source)}
    template = ablate(gt, {"M5"}, "T5")
    gt_lines = gt.source.splitlines(keepends=True)
    span = spans["M5"]
    outside = gt_lines[: span.open_line] + gt_lines[span.close_line + 1 :]
    template_lines = template.source.splitlines(keepends=True)
    for line in outside:
        assert line in template_lines


def test_ablate_splice_random_subsets_byte_identity():
    manifest = load_manifest(CORPUS_ROOT)
    gt = ground_truth(manifest, AttackVector.SPECTRE_V1)
    catalog = load_catalog(AttackVector.SPECTRE_V1)
    ids = [m.id for m in catalog.templatable()]
    rng = random.Random(7)
    for _ in range(40):
        subset = set(rng.sample(ids, rng.randint(1, len(ids))))
        template = ablate(gt, subset, "TX")
        assert splice(template, gt) == gt.source
        assert {s.metric_id for s in parse_markers(template.source)} == set(ids) - subset | {"M1", "M2"}


# --- documents -----------------------------------------------------------------

def _doc(**overrides) -> RagDocument:
    ns = Namespace(AttackVector.SPECTRE_V1, "gpt")
    base = dict(
        doc_id=make_doc_id(ns, {"M11"}),
        namespace=ns,
        metric_ids=frozenset({"M11"}),
        title="Array/Probe Initialization",
        importance="Deterministic cache state before timing.",
        implementation_guidance=["Write every element once.", "Cover the whole array."],
        placement_guidance="Start of main, before the attack loop.",
    )
    base.update(overrides)
    return RagDocument(**base)


def test_render_parse_roundtrip_m11():
    doc = _doc()
    parsed = parse_document(
        render_document(doc),
        doc_id=doc.doc_id,
        namespace=doc.namespace,
        metric_ids=doc.metric_ids,
    )
    assert parsed == doc


_section_text = st.text(
    alphabet=st.characters(whitelist_categories=("L", "N"), whitelist_characters=" ,."),
    min_size=1, max_size=80,
).map(lambda s: s.strip()).filter(lambda s: s and not s[0].isdigit())


@given(
    title=_section_text,
    importance=st.lists(_section_text, min_size=1, max_size=3),
    steps=st.lists(_section_text, min_size=1, max_size=5),
    placement=st.lists(_section_text, min_size=1, max_size=2),
)
def test_render_parse_roundtrip_property(title, importance, steps, placement):
    doc = _doc(
        title=title,
        importance="\n\n".join(importance),
        implementation_guidance=steps,
        placement_guidance="\n\n".join(placement),
    )
    parsed = parse_document(
        render_document(doc), doc_id=doc.doc_id, namespace=doc.namespace, metric_ids=doc.metric_ids
    )
    assert parsed == doc


def test_parse_document_rejects_missing_or_reordered_sections():
    with pytest.raises(MalformedModelOutput):
        parse_document("**Title:** X\n\n**Importance:**\nY\n")
    good = render_document(_doc())
    reordered = good.replace("**Importance:**", "**ZZZ:**")
    with pytest.raises(MalformedModelOutput):
        parse_document(reordered)


def test_parse_document_rejects_empty_section():
    text = (
        "**Title:** X\n\n**Importance:**\n\n"
        "**Implementation Guidance:**\n- s\n\n**Placement Guidance:**\nP\n"
    )
    with pytest.raises(MalformedModelOutput):
        parse_document(text)


def test_apply_feedback_add_branchless_bullets():
    doc = _doc(
        title="Controlled Branch Misprediction",
        metric_ids=frozenset({"M3"}),
        status=DocStatus.FINALIZED,
    )
    instr = FeedbackInstruction(
        kind=FeedbackKind.ADD,
        section=DocSection.IMPLEMENTATION,
        content=(
            "- Interleave safe and malicious index values within the same loop.\n"
            "- Use branchless arithmetic expressions; never use branching constructs"
            " such as if statements or ternary operators.\n"
            "- Example: index = a + cond * (b - a); where cond = !(j % 6) toggles between 0 and 1.\n"
        ),
    )
    revised = apply_feedback(doc, instr)
    assert revised.revision == doc.revision + 1
    assert revised.status is DocStatus.UNDER_TEST
    assert any("index = a + cond * (b - a);" in step for step in revised.implementation_guidance)
    # prior revision retained, immutable
    assert revised.history[-1].revision == doc.revision
    assert revised.history[-1].implementation_guidance == tuple(doc.implementation_guidance)


def test_apply_feedback_remove_paragraph():
    doc = _doc(importance="First paragraph.\n\nVerbose second paragraph.")
    instr = FeedbackInstruction(kind=FeedbackKind.REMOVE, section=DocSection.IMPORTANCE, anchor=1)
    revised = apply_feedback(doc, instr)
    assert "Verbose second paragraph." not in revised.importance
    assert revised.revision == 2


def test_apply_feedback_bad_anchor():
    doc = _doc()
    with pytest.raises(BadAnchor):
        apply_feedback(
            doc,
            FeedbackInstruction(
                kind=FeedbackKind.MODIFY, section=DocSection.IMPLEMENTATION,
                content="new step", anchor=99,
            ),
        )


def test_apply_feedback_title_only_modify():
    doc = _doc()
    with pytest.raises(SectionMissing):
        apply_feedback(
            doc,
            FeedbackInstruction(kind=FeedbackKind.ADD, section=DocSection.TITLE, content="x"),
        )
    revised = apply_feedback(
        doc,
        FeedbackInstruction(kind=FeedbackKind.MODIFY, section=DocSection.TITLE, content="New Title"),
    )
    assert revised.title == "New Title"


def test_feedback_instruction_content_invariants():
    with pytest.raises(ValueError):
        FeedbackInstruction(kind=FeedbackKind.REMOVE, section=DocSection.IMPORTANCE, content="x")
    with pytest.raises(ValueError):
        FeedbackInstruction(kind=FeedbackKind.ADD, section=DocSection.IMPORTANCE, content="  ")


def test_history_chain_immutable_across_revisions():
    doc = _doc()
    r2 = apply_feedback(
        doc, FeedbackInstruction(FeedbackKind.ADD, DocSection.IMPLEMENTATION, "Another step.")
    )
    r3 = apply_feedback(
        r2, FeedbackInstruction(FeedbackKind.MODIFY, DocSection.TITLE, "Renamed")
    )
    assert [rev.revision for rev in r3.history] == [1, 2]
    assert r3.history[0].title == doc.title
    assert r3.history[1].implementation_guidance[-1] == "Another step."


# --- unit-test verdict ----------------------------------------------------------

@pytest.mark.parametrize("passes,expected", [(0, "Refine"), (3, "Refine"), (4, "Finalized"), (5, "Finalized")])
def test_unit_verdict_pure_function(passes, expected):
    from pocsmith.knowledge.testing import verdict_from_passes

    assert verdict_from_passes(passes).outcome.value == expected


def test_unit_verdict_rejects_inconsistent_pair():
    from pocsmith.knowledge.testing import UnitOutcome, UnitTestVerdict

    with pytest.raises(ValueError):
        UnitTestVerdict(passes=5, outcome=UnitOutcome.REFINE)
