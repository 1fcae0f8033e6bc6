from .catalog import AttackMetric, AttackVector, MetricCatalog, load_catalog, load_catalog_file
from .documents import (
    DocSection,
    DocStatus,
    DocumentRevision,
    FeedbackInstruction,
    FeedbackKind,
    Namespace,
    RagDocument,
    apply_feedback,
    make_doc_id,
    parse_document,
    render_document,
)
from .markers import AnnotatedPoc, MarkerSpan, Template, ablate, parse_markers, splice

__all__ = [
    "AttackMetric",
    "AttackVector",
    "MetricCatalog",
    "load_catalog",
    "load_catalog_file",
    "DocSection",
    "DocStatus",
    "DocumentRevision",
    "FeedbackInstruction",
    "FeedbackKind",
    "Namespace",
    "RagDocument",
    "apply_feedback",
    "make_doc_id",
    "parse_document",
    "render_document",
    "AnnotatedPoc",
    "MarkerSpan",
    "Template",
    "ablate",
    "parse_markers",
    "splice",
]
