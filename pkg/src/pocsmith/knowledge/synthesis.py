"""Standalone document synthesis from failed reconstruction attempts."""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional

from ..errors import MalformedModelOutput
from .catalog import AttackVector
from .documents import DocStatus, Namespace, RagDocument, make_doc_id, parse_document
from .markers import AnnotatedPoc

if TYPE_CHECKING:  # pragma: no cover
    from ..agents.backends import ChatBackend
    from ..runstore.hub import MemoryHub


def synthesize_document(
    ground_truth: AnnotatedPoc,
    failed_attempts: list[str],
    criteria: str,
    metric_ids: frozenset[str] | set[str],
    backend: "ChatBackend",
    namespace: Namespace | None = None,
    hub: Optional["MemoryHub"] = None,
) -> RagDocument:
    """One Synthesizer completion (retried once on a malformed document);
    the draft is persisted to the hub when one is provided."""
    from ..agents.messages import AgentRole, Message
    from ..agents.prompts import PromptContext, assemble_prompts

    if not failed_attempts:
        raise ValueError("document synthesis needs at least one failed attempt")
    ns = namespace or Namespace(ground_truth.attack, "unspecified")
    ctx = PromptContext(
        stage="s2",
        attack=ground_truth.attack,
        metric_ids=tuple(sorted(metric_ids, key=lambda m: int(m[1:]))),
    )
    system_text, user_text = assemble_prompts(AgentRole.SYNTHESIZER, ctx)
    attempts_text = "\n\n".join(
        f"Failed attempt {i + 1}:\n```c\n{attempt}\n```" for i, attempt in enumerate(failed_attempts)
    )
    user_text = (
        f"{user_text}\nGround truth:\n```c\n{ground_truth.source}\n```\n\n"
        f"Evaluation criteria:\n{criteria}\n\n{attempts_text}"
    )
    messages = [Message("system", system_text), Message("user", user_text)]
    last_error: Exception | None = None
    for _ in range(2):
        turn = backend.complete(messages, [], AgentRole.SYNTHESIZER)
        try:
            doc = parse_document(
                turn.message.content,
                doc_id=make_doc_id(ns, frozenset(metric_ids)),
                namespace=ns,
                metric_ids=frozenset(metric_ids),
                status=DocStatus.DRAFT,
            )
        except MalformedModelOutput as exc:
            last_error = exc
            continue
        if hub is not None:
            hub.store(doc)
        return doc
    raise MalformedModelOutput(f"synthesizer output rejected twice: {last_error}")


__all__ = ["synthesize_document", "AttackVector"]
