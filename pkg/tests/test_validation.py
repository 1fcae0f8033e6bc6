from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from pocsmith.errors import JudgeParseFailure, MixedAttacks, NoLeakLines
from pocsmith.knowledge import AttackVector, ablate, load_catalog
from pocsmith.corpus import ground_truth, load_manifest
from pocsmith.validation import (
    GapMode,
    GapReport,
    MetricStatus,
    Presence,
    aggregate,
    eval_prime_probe,
    eval_spectre,
    gap_profile,
    parse_prime_probe_output,
    parse_spectre_output,
)

from conftest import CORPUS_ROOT

SECRET = "It's a secret!!"


# --- spectre output parsing -----------------------------------------------------

def test_parse_single_line_grammar():
    report = parse_spectre_output("0x49='I' score=2 Success\n")
    assert len(report.guessed_bytes) == 1
    entry = report.guessed_bytes[0]
    assert entry.value == 0x49
    assert entry.ascii == "I"
    assert entry.score == 2
    assert entry.status == "Success"
    assert entry.offset == 0


def test_parse_banner_only_raises():
    with pytest.raises(NoLeakLines):
        parse_spectre_output("Reading 15 bytes:\nwarming up...\n")


def test_parse_fifteen_lines_sequential_offsets():
    lines = "\n".join(f"0x{41 + i:02X}='x' score={i} Unclear" for i in range(15))
    report = parse_spectre_output(lines)
    assert [b.offset for b in report.guessed_bytes] == list(range(15))


def test_parse_explicit_offsets_and_pointer_noise():
    text = (
        "Reading mal_x = 0xffffffffffffdfc8\n"
        "offset=3 0x73='s' score=7 Success\n"
        "offset=1 0x74='t' score=5 Success\n"
    )
    report = parse_spectre_output(text)
    assert [b.offset for b in report.guessed_bytes] == [1, 3]
    assert report.guessed_bytes[0].value == 0x74


def _leak_text(secret: str, correct_positions: set[int]) -> str:
    lines = []
    for i, ch in enumerate(secret.encode()):
        value = ch if i in correct_positions else (ch ^ 0xFF)
        lines.append(f"offset={i} 0x{value:02X}='?' score=5 Success")
    return "\n".join(lines)


def test_eval_spectre_8_of_15_passes():
    report = parse_spectre_output(_leak_text(SECRET, set(range(8))))
    verdict = eval_spectre(SECRET, report)
    assert verdict.correct == 8
    assert verdict.passed
    assert abs(verdict.fraction - 8 / 15) < 1e-12


def test_eval_spectre_7_of_15_fails():
    report = parse_spectre_output(_leak_text(SECRET, set(range(7))))
    verdict = eval_spectre(SECRET, report)
    assert verdict.correct == 7
    assert not verdict.passed


def test_eval_spectre_perfect_leak():
    report = parse_spectre_output(_leak_text(SECRET, set(range(15))))
    verdict = eval_spectre(SECRET, report)
    assert verdict.fraction == 1.0
    assert verdict.passed


def test_eval_spectre_missing_positions_count_incorrect():
    report = parse_spectre_output("offset=0 0x49='I' score=9 Success")
    verdict = eval_spectre(SECRET, report)
    assert verdict.correct == 1
    assert not verdict.passed


@given(st.sets(st.integers(min_value=0, max_value=14)))
def test_eval_spectre_monotone_in_correct_set(positions):
    report = parse_spectre_output(_leak_text(SECRET, positions)) if positions else None
    if report is None:
        return
    base = eval_spectre(SECRET, report)
    for extra in set(range(15)) - positions:
        grown = eval_spectre(SECRET, parse_spectre_output(_leak_text(SECRET, positions | {extra})))
        assert grown.fraction >= base.fraction
    assert base.passed == (2 * base.correct >= 15)


# --- prime+probe ------------------------------------------------------------------

@pytest.mark.parametrize(
    "baseline,contended,expected",
    [(100, 105, True), (100, 104, False), (100, 90, False), (0, 5, True), (50.0, 55.0, True)],
)
def test_eval_prime_probe_inclusive_boundary(baseline, contended, expected):
    assert eval_prime_probe(baseline, contended) is expected


def test_eval_prime_probe_rejects_nonfinite():
    with pytest.raises(ValueError):
        eval_prime_probe(float("nan"), 10.0)


def test_parse_prime_probe_dedicated_lines():
    out = "eviction_set_size=12\nbaseline_cycles=216\ncontended_cycles=233\n"
    assert parse_prime_probe_output(out) == (216.0, 233.0)


# --- gap profiling -----------------------------------------------------------------

@pytest.fixture(scope="module")
def spectre_setup():
    manifest = load_manifest(CORPUS_ROOT)
    gt = ground_truth(manifest, AttackVector.SPECTRE_V1)
    catalog = load_catalog(AttackVector.SPECTRE_V1)
    return gt, catalog


def test_gap_profile_identity_all_present(spectre_setup):
    gt, catalog = spectre_setup
    report = gap_profile(gt.source, gt, catalog)
    assert report.all_present()


def test_gap_profile_random_ablations_mark_exactly_s(spectre_setup):
    gt, catalog = spectre_setup
    ids = [m.id for m in catalog.templatable()]
    rng = random.Random(13)
    for _ in range(30):
        subset = set(rng.sample(ids, rng.randint(1, len(ids))))
        template = ablate(gt, subset, "TX")
        report = gap_profile(template.source, gt, catalog)
        assert report.missing_ids() == subset


def test_gap_profile_emptied_block_reads_missing(spectre_setup):
    gt, catalog = spectre_setup
    lines = gt.source.splitlines(keepends=True)
    from pocsmith.knowledge import parse_markers

    span = next(s for s in parse_markers(gt.source) if s.metric_id == "M8")
    body_start, body_stop = span.body_range
    hollow = "".join(lines[:body_start]) + "".join(lines[body_stop:])
    report = gap_profile(hollow, gt, catalog)
    assert "M8" in report.missing_ids()


def test_gap_profile_model_judged_parses_and_requires_all(spectre_setup):
    gt, catalog = spectre_setup
    verdict_lines = "\n".join(
        f"{m.id}: {'Missing' if m.id == 'M4' else 'Present'}" for m in catalog.templatable()
    )
    report = gap_profile("", gt, catalog, mode=GapMode.MODEL_JUDGED, judge_verdict=verdict_lines)
    assert report.missing_ids() == {"M4"}
    with pytest.raises(JudgeParseFailure):
        gap_profile("", gt, catalog, mode=GapMode.MODEL_JUDGED, judge_verdict="M4: Missing")


def test_gap_report_json_roundtrip(spectre_setup):
    gt, catalog = spectre_setup
    report = gap_profile(ablate(gt, {"M3"}, "T3").source, gt, catalog, run_id="r1")
    again = GapReport.from_json(report.to_json())
    assert again.missing_ids() == {"M3"}
    assert again.run_id == "r1"
    assert again.attack is AttackVector.SPECTRE_V1


# --- aggregation --------------------------------------------------------------------

def _report(missing: set[str], attack=AttackVector.SPECTRE_V1, run_id="r") -> GapReport:
    catalog = load_catalog(attack)
    statuses = [
        MetricStatus(m.id, Presence.MISSING if m.id in missing else Presence.PRESENT)
        for m in catalog.templatable()
    ]
    return GapReport(run_id=run_id, attack=attack, statuses=statuses)


def test_aggregate_all_missing_metric_rate_zero():
    reports = [_report({"M4"}, run_id=f"r{i}") for i in range(10)]
    stats = aggregate(reports)
    rates = {r.metric_id: r.success_rate for r in stats.per_metric}
    assert rates["M4"] == 0.0
    assert rates["M3"] == 1.0
    assert stats.n_runs == 10


def test_aggregate_whole_poc_success_count():
    reports = [_report(set(), run_id="a"), _report(set(), run_id="b")] + [
        _report({"M11"}, run_id=f"c{i}") for i in range(8)
    ]
    stats = aggregate(reports)
    assert stats.full_poc_successes == 2
    assert stats.n_runs == 10


def test_aggregate_permutation_invariant():
    reports = [_report({"M4"}), _report(set()), _report({"M3", "M5"})]
    forward = aggregate(reports)
    backward = aggregate(list(reversed(reports)))
    assert {r.metric_id: r.success_rate for r in forward.per_metric} == {
        r.metric_id: r.success_rate for r in backward.per_metric
    }


def test_aggregate_rejects_mixed_attacks():
    with pytest.raises(MixedAttacks):
        aggregate([_report(set()), _report(set(), attack=AttackVector.PRIME_PROBE)])


def test_aggregate_csv_shape():
    stats = aggregate([_report({"M4"}) for _ in range(4)])
    lines = stats.to_csv().strip().splitlines()
    assert lines[0] == "metric,rate,n"
    assert any(line.startswith("M4,0.000,4") for line in lines)
