"""Metric marker grammar over annotated C sources.

Ground-truth PoCs carry inline block comments that delimit each metric:

    /* M11: Array/Probe Initialization */
    ... block body ...
    /***********************************/

The open marker names the metric; the close marker is a comment whose
body is only asterisks (at least five). Ablation replaces a whole marked
block (markers included) with a one-line exclusion banner, and splicing
restores it byte-for-byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import DuplicateMetric, MetricNotFound, UnbalancedMarker
from .catalog import AttackVector

OPEN_MARKER = re.compile(r"^(\s*)/\*\s*M(\d+):\s*(.*?)\s*\*/\s*$")
CLOSE_MARKER = re.compile(r"^\s*/\*{5,}/\s*$")
EXCLUSION_BANNER = re.compile(r"^(\s*)/\*\s*Excluding\s+M(\d+):\s*(.*?)\s*\*/\s*$")


@dataclass(frozen=True)
class MarkerSpan:
    """One marked block, all indices 0-based line numbers into the source."""

    metric_id: str
    name: str
    open_line: int
    close_line: int

    @property
    def body_range(self) -> tuple[int, int]:
        """Half-open [start, stop) line range of the block body."""
        return self.open_line + 1, self.close_line


@dataclass(frozen=True)
class AnnotatedPoc:
    attack: AttackVector
    source: str
    language: str = "c"

    def markers(self) -> list[MarkerSpan]:
        return parse_markers(self.source)

    def marker_ids(self) -> set[str]:
        return {span.metric_id for span in self.markers()}


@dataclass(frozen=True)
class Template:
    template_id: str
    omitted: frozenset[str]
    source: str
    attack: AttackVector


def _lines(text: str) -> list[str]:
    return text.splitlines(keepends=True)


def parse_markers(source: str) -> list[MarkerSpan]:
    """Return marked spans in source order.

    Raises UnbalancedMarker for an open without a close (or vice versa,
    or a nested open), DuplicateMetric when one id is marked twice.
    """
    spans: list[MarkerSpan] = []
    seen: set[str] = set()
    open_span: tuple[str, str, int] | None = None
    for idx, line in enumerate(_lines(source)):
        opened = OPEN_MARKER.match(line)
        if opened:
            if open_span is not None:
                raise UnbalancedMarker(idx + 1, f"marker M{opened.group(2)} opened inside M{open_span[0][1:]}")
            metric_id = f"M{opened.group(2)}"
            if metric_id in seen:
                raise DuplicateMetric(metric_id)
            open_span = (metric_id, opened.group(3), idx)
            continue
        if CLOSE_MARKER.match(line):
            if open_span is None:
                raise UnbalancedMarker(idx + 1, "close marker without open")
            metric_id, name, open_line = open_span
            spans.append(MarkerSpan(metric_id, name, open_line, idx))
            seen.add(metric_id)
            open_span = None
    if open_span is not None:
        raise UnbalancedMarker(open_span[2] + 1, f"marker {open_span[0]} never closed")
    return spans


def ablate(poc: AnnotatedPoc, metric_ids: set[str] | frozenset[str], template_id: str) -> Template:
    """Replace each targeted marked block with a one-line exclusion banner.

    Every byte outside the targeted blocks is preserved, including the
    banner's indentation (taken from the open marker's line).
    """
    spans = {span.metric_id: span for span in parse_markers(poc.source)}
    missing = set(metric_ids) - set(spans)
    if missing:
        raise MetricNotFound(sorted(missing)[0])

    lines = _lines(poc.source)
    out: list[str] = []
    targeted = sorted((spans[mid] for mid in metric_ids), key=lambda s: s.open_line)
    cursor = 0
    for span in targeted:
        out.extend(lines[cursor : span.open_line])
        indent = OPEN_MARKER.match(lines[span.open_line]).group(1)
        newline = "\n" if lines[span.close_line].endswith("\n") else ""
        out.append(f"{indent}/* Excluding {span.metric_id}: {span.name} */{newline}")
        cursor = span.close_line + 1
    out.extend(lines[cursor:])
    return Template(
        template_id=template_id,
        omitted=frozenset(metric_ids),
        source="".join(out),
        attack=poc.attack,
    )


def splice(template: Template, original: AnnotatedPoc) -> str:
    """Restore the omitted blocks of a template from its ground truth.

    Inverse of ablate: for a template produced from ``original``,
    ``splice(ablate(original, S, t), original) == original.source``.
    """
    spans = {span.metric_id: span for span in parse_markers(original.source)}
    original_lines = _lines(original.source)
    out: list[str] = []
    for line in _lines(template.source):
        banner = EXCLUSION_BANNER.match(line)
        if banner and f"M{banner.group(2)}" in template.omitted:
            span = spans.get(f"M{banner.group(2)}")
            if span is None:
                raise MetricNotFound(f"M{banner.group(2)}")
            out.extend(original_lines[span.open_line : span.close_line + 1])
        else:
            out.append(line)
    return "".join(out)


def block_body(source: str, span: MarkerSpan) -> str:
    start, stop = span.body_range
    return "".join(_lines(source)[start:stop])
