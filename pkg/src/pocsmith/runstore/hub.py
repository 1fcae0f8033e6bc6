"""Memory hub: the on-disk store of guidance documents.

One Markdown file per metric set per namespace:

    memory_hub/<family>/<attack>/<ids>.md          current revision body
    memory_hub/<family>/<attack>/<ids>.meta.json   revision, status, history

The .md file is exactly the rendered four-section document so it stays
hand-readable and diff-friendly; lifecycle metadata rides in the sidecar.
Single writer (callers serialize document mutations).
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import DocumentMissing
from ..knowledge.catalog import AttackVector
from ..knowledge.documents import (
    DocStatus,
    DocumentRevision,
    Namespace,
    RagDocument,
    make_doc_id,
    parse_document,
    render_document,
)


def _ids_stem(metric_ids: frozenset[str] | set[str]) -> str:
    return "-".join(sorted(metric_ids, key=lambda m: int(m[1:])))


class MemoryHub:
    def __init__(self, root: Path | str):
        self.root = Path(root)

    def _doc_path(self, ns: Namespace, metric_ids: frozenset[str] | set[str]) -> Path:
        return self.root / ns.model_family / ns.attack.value / f"{_ids_stem(metric_ids)}.md"

    def store(self, doc: RagDocument) -> Path:
        path = self._doc_path(doc.namespace, doc.metric_ids)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_document(doc))
        meta = {
            "doc_id": doc.doc_id,
            "metric_ids": sorted(doc.metric_ids, key=lambda m: int(m[1:])),
            "revision": doc.revision,
            "status": doc.status.value,
            "history": [
                {
                    "revision": rev.revision,
                    "title": rev.title,
                    "importance": rev.importance,
                    "implementation_guidance": list(rev.implementation_guidance),
                    "placement_guidance": rev.placement_guidance,
                }
                for rev in doc.history
            ],
        }
        path.with_suffix(".meta.json").write_text(json.dumps(meta, indent=2))
        return path

    def load(self, family: str, attack: AttackVector | str, metric_ids: frozenset[str] | set[str]) -> RagDocument:
        ns = Namespace(
            attack=attack if isinstance(attack, AttackVector) else AttackVector.parse(attack),
            model_family=family,
        )
        path = self._doc_path(ns, metric_ids)
        if not path.is_file():
            raise DocumentMissing(f"no document at {path}")
        revision, status, history = 1, DocStatus.DRAFT, []
        meta_path = path.with_suffix(".meta.json")
        if meta_path.is_file():
            meta = json.loads(meta_path.read_text())
            revision = meta.get("revision", 1)
            status = DocStatus(meta.get("status", "Draft"))
            history = [
                DocumentRevision(
                    revision=entry["revision"],
                    title=entry["title"],
                    importance=entry["importance"],
                    implementation_guidance=tuple(entry["implementation_guidance"]),
                    placement_guidance=entry["placement_guidance"],
                )
                for entry in meta.get("history", [])
            ]
        doc = parse_document(
            path.read_text(),
            doc_id=make_doc_id(ns, metric_ids),
            namespace=ns,
            metric_ids=frozenset(metric_ids),
            revision=revision,
            status=status,
        )
        doc.history = history
        return doc

    def load_by_id(self, doc_id: str) -> RagDocument:
        family, attack, ids = parse_doc_id(doc_id)
        return self.load(family, attack, ids)

    def documents(self, ns: Namespace | None = None) -> list[RagDocument]:
        docs = []
        if not self.root.is_dir():
            return docs
        families = [self.root / ns.model_family] if ns else sorted(self.root.iterdir())
        for family_dir in families:
            if not family_dir.is_dir():
                continue
            attack_dirs = (
                [family_dir / ns.attack.value] if ns else sorted(family_dir.iterdir())
            )
            for attack_dir in attack_dirs:
                if not attack_dir.is_dir():
                    continue
                try:
                    attack = AttackVector.parse(attack_dir.name)
                except ValueError:
                    continue
                for md in sorted(attack_dir.glob("*.md")):
                    ids = frozenset(md.stem.split("-"))
                    docs.append(self.load(family_dir.name, attack, ids))
        return docs


def parse_doc_id(doc_id: str) -> tuple[str, AttackVector, frozenset[str]]:
    try:
        family, attack, ids = doc_id.split(":")
        return family, AttackVector.parse(attack), frozenset(ids.split("+"))
    except ValueError as exc:
        raise DocumentMissing(f"malformed document id {doc_id!r}") from exc
