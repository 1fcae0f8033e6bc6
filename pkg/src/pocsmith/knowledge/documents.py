"""Guidance documents: schema, rendering, parsing, and expert feedback.

A document captures everything an agent needs to reconstruct one metric
(or one merged metric group): why it matters, how to build it, and where
it goes. Rendered form is Markdown with four bold headings in fixed
order; parse and render are inverses on canonical documents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum

from ..errors import BadAnchor, MalformedModelOutput, SectionMissing
from .catalog import AttackVector

MAX_RENDERED_CHARS = 1500

HEADINGS = ("Title", "Importance", "Implementation Guidance", "Placement Guidance")
_HEADING_RE = re.compile(r"^\*\*(Title|Importance|Implementation Guidance|Placement Guidance):\*\*\s*(.*)$")


@dataclass(frozen=True)
class Namespace:
    """Document scope: one attack vector under one model family."""

    attack: AttackVector
    model_family: str

    def __str__(self) -> str:
        return f"{self.model_family}/{self.attack.value}"


class DocStatus(str, Enum):
    DRAFT = "Draft"
    UNDER_TEST = "UnderTest"
    FINALIZED = "Finalized"


class FeedbackKind(str, Enum):
    ADD = "ADD"
    REMOVE = "REMOVE"
    MODIFY = "MODIFY"


class DocSection(str, Enum):
    TITLE = "Title"
    IMPORTANCE = "Importance"
    IMPLEMENTATION = "ImplementationGuidance"
    PLACEMENT = "PlacementGuidance"


@dataclass(frozen=True)
class DocumentRevision:
    """Immutable snapshot of one revision's content."""

    revision: int
    title: str
    importance: str
    implementation_guidance: tuple[str, ...]
    placement_guidance: str


@dataclass
class RagDocument:
    doc_id: str
    namespace: Namespace
    metric_ids: frozenset[str]
    title: str
    importance: str
    implementation_guidance: list[str]
    placement_guidance: str
    revision: int = 1
    status: DocStatus = DocStatus.DRAFT
    history: list[DocumentRevision] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.revision < 1:
            raise ValueError("revision starts at 1")
        for name, value in (
            ("Title", self.title),
            ("Importance", self.importance),
            ("Placement Guidance", self.placement_guidance),
        ):
            if not value.strip():
                raise ValueError(f"document section {name} must be non-empty")
        if not any(step.strip() for step in self.implementation_guidance):
            raise ValueError("document needs at least one implementation step")

    def snapshot(self) -> DocumentRevision:
        return DocumentRevision(
            revision=self.revision,
            title=self.title,
            importance=self.importance,
            implementation_guidance=tuple(self.implementation_guidance),
            placement_guidance=self.placement_guidance,
        )

    def over_length(self) -> bool:
        """Length target exceeded; flagged by callers, never fatal."""
        return len(render_document(self)) > MAX_RENDERED_CHARS


def make_doc_id(namespace: Namespace, metric_ids: frozenset[str] | set[str]) -> str:
    ordered = sorted(metric_ids, key=lambda m: int(m[1:]))
    return f"{namespace.model_family}:{namespace.attack.value}:{'+'.join(ordered)}"


def _paragraphs(text: str) -> list[str]:
    return [p.strip() for p in re.split(r"\n\s*\n", text) if p.strip()]


def render_document(doc: RagDocument) -> str:
    """Canonical Markdown rendering with the four fixed headings."""
    parts = [f"**Title:** {doc.title.strip()}", ""]
    parts.append("**Importance:**")
    parts.append("\n\n".join(_paragraphs(doc.importance)))
    parts.append("")
    parts.append("**Implementation Guidance:**")
    for step in doc.implementation_guidance:
        if step.strip():
            parts.append(f"- {step.strip()}")
    parts.append("")
    parts.append("**Placement Guidance:**")
    parts.append("\n\n".join(_paragraphs(doc.placement_guidance)))
    return "\n".join(parts) + "\n"


def parse_document_sections(text: str) -> dict[str, str]:
    """Split rendered text into the four sections, enforcing order.

    Raises MalformedModelOutput on missing, reordered, or empty sections.
    """
    sections: dict[str, list[str]] = {}
    order: list[str] = []
    current: str | None = None
    for line in text.splitlines():
        match = _HEADING_RE.match(line.strip())
        if match:
            heading = match.group(1)
            if heading in sections:
                raise MalformedModelOutput(f"duplicate heading {heading!r}")
            sections[heading] = [match.group(2)] if match.group(2) else []
            order.append(heading)
            current = heading
        elif current is not None:
            sections[current].append(line)
    if tuple(order) != HEADINGS:
        raise MalformedModelOutput(f"expected headings {HEADINGS}, found {tuple(order)}")
    joined = {h: "\n".join(body).strip() for h, body in sections.items()}
    for heading in HEADINGS:
        if not joined[heading]:
            raise MalformedModelOutput(f"empty section {heading!r}")
    return joined


def _steps_from_text(text: str) -> list[str]:
    steps = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        stripped = re.sub(r"^(?:[-*+]|\d+[.)])\s+", "", stripped)
        steps.append(stripped)
    return steps


def parse_document(
    text: str,
    *,
    doc_id: str = "",
    namespace: Namespace | None = None,
    metric_ids: frozenset[str] | set[str] | None = None,
    revision: int = 1,
    status: DocStatus = DocStatus.DRAFT,
) -> RagDocument:
    sections = parse_document_sections(text)
    ns = namespace if namespace is not None else Namespace(AttackVector.SPECTRE_V1, "unspecified")
    ids = frozenset(metric_ids) if metric_ids else frozenset()
    return RagDocument(
        doc_id=doc_id or (make_doc_id(ns, ids) if ids else sections["Title"]),
        namespace=ns,
        metric_ids=ids,
        title=sections["Title"],
        importance=sections["Importance"],
        implementation_guidance=_steps_from_text(sections["Implementation Guidance"]),
        placement_guidance=sections["Placement Guidance"],
        revision=revision,
        status=status,
    )


@dataclass(frozen=True)
class FeedbackInstruction:
    kind: FeedbackKind
    section: DocSection
    content: str = ""
    anchor: int | None = None

    def __post_init__(self) -> None:
        if self.kind is FeedbackKind.REMOVE and self.content.strip():
            raise ValueError("REMOVE carries no content")
        if self.kind in (FeedbackKind.ADD, FeedbackKind.MODIFY) and not self.content.strip():
            raise ValueError(f"{self.kind.value} requires content")


def _edit_items(items: list[str], instr: FeedbackInstruction, new_items: list[str]) -> list[str]:
    """Apply an anchored list edit; anchors are 0-based indices."""
    result = list(items)
    if instr.kind is FeedbackKind.ADD:
        pos = len(result) if instr.anchor is None else instr.anchor
        if not 0 <= pos <= len(result):
            raise BadAnchor(pos, len(result))
        result[pos:pos] = new_items
    elif instr.kind is FeedbackKind.REMOVE:
        if instr.anchor is None or not 0 <= instr.anchor < len(result):
            raise BadAnchor(-1 if instr.anchor is None else instr.anchor, len(result))
        del result[instr.anchor]
    else:  # MODIFY
        if instr.anchor is None or not 0 <= instr.anchor < len(result):
            raise BadAnchor(-1 if instr.anchor is None else instr.anchor, len(result))
        result[instr.anchor : instr.anchor + 1] = new_items
    return result


def apply_feedback(doc: RagDocument, instr: FeedbackInstruction) -> RagDocument:
    """Produce the next revision of ``doc`` per one expert instruction.

    Prior revisions are retained immutably in history; any status
    (including Finalized) reverts to UnderTest pending a fresh unit test.
    """
    title = doc.title
    importance = doc.importance
    steps = list(doc.implementation_guidance)
    placement = doc.placement_guidance

    if instr.section is DocSection.TITLE:
        if instr.kind is not FeedbackKind.MODIFY:
            raise SectionMissing(f"Title supports MODIFY only, not {instr.kind.value}")
        title = instr.content.strip()
    elif instr.section is DocSection.IMPLEMENTATION:
        steps = _edit_items(steps, instr, _steps_from_text(instr.content))
        if not steps:
            raise SectionMissing("ImplementationGuidance cannot be emptied")
    else:
        text = importance if instr.section is DocSection.IMPORTANCE else placement
        if instr.kind is FeedbackKind.MODIFY and instr.anchor is None:
            edited = instr.content.strip()
        else:
            paragraphs = _edit_items(_paragraphs(text), instr, _paragraphs(instr.content))
            if not paragraphs:
                raise SectionMissing(f"{instr.section.value} cannot be emptied")
            edited = "\n\n".join(paragraphs)
        if instr.section is DocSection.IMPORTANCE:
            importance = edited
        else:
            placement = edited

    return replace(
        doc,
        title=title,
        importance=importance,
        implementation_guidance=steps,
        placement_guidance=placement,
        revision=doc.revision + 1,
        status=DocStatus.UNDER_TEST,
        history=[*doc.history, doc.snapshot()],
    )
