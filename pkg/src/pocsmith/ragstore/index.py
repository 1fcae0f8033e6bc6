"""Persistent, namespace-scoped vector index.

Layout on disk, one directory per namespace:

    index/<attack>/<family>/manifest.json   embedder id, dim, doc->chunk map
    index/<attack>/<family>/vectors.bin     float32 rows, append-only

Vectors are keyed by chunk content hash: text that has not changed is
never re-embedded, and reloading from disk reproduces retrieval results
exactly. Many readers, one writer (advisory file lock).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from filelock import FileLock, Timeout

from ..errors import IndexLocked
from ..knowledge.documents import Namespace, RagDocument, render_document
from .chunking import chunk
from .embedders import Embedder, HashedEmbedder


@dataclass(frozen=True)
class Retrieved:
    doc_id: str
    score: float


class VectorIndex:
    def __init__(self, root: Path | str, embedder: Embedder | None = None):
        self.root = Path(root)
        self.embedder = embedder or HashedEmbedder()

    # -- storage ------------------------------------------------------------

    def _ns_dir(self, ns: Namespace) -> Path:
        return self.root / ns.attack.value / ns.model_family

    def _load_manifest(self, ns: Namespace) -> dict:
        path = self._ns_dir(ns) / "manifest.json"
        if not path.is_file():
            return {
                "embedder_id": self.embedder.embedder_id,
                "dim": self.embedder.dim,
                "rows": [],        # content hashes, row i of vectors.bin
                "documents": {},   # doc_id -> [chunk hashes in ordinal order]
            }
        with open(path) as fh:
            manifest = json.load(fh)
        if manifest["embedder_id"] != self.embedder.embedder_id:
            raise ValueError(
                f"index built with embedder {manifest['embedder_id']!r}, "
                f"opened with {self.embedder.embedder_id!r}"
            )
        return manifest

    def _save_manifest(self, ns: Namespace, manifest: dict) -> None:
        path = self._ns_dir(ns) / "manifest.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(manifest, indent=2))
        tmp.replace(path)

    def _load_vectors(self, ns: Namespace, count: int) -> np.ndarray:
        path = self._ns_dir(ns) / "vectors.bin"
        if not path.is_file() or count == 0:
            return np.zeros((0, self.embedder.dim), dtype=np.float32)
        data = np.fromfile(path, dtype=np.float32)
        return data.reshape(-1, self.embedder.dim)[:count]

    def _writer_lock(self, ns: Namespace) -> FileLock:
        self._ns_dir(ns).mkdir(parents=True, exist_ok=True)
        return FileLock(str(self._ns_dir(ns) / ".writer.lock"), timeout=10.0)

    # -- operations ----------------------------------------------------------

    def upsert(self, ns: Namespace, doc: RagDocument) -> int:
        """Index a document's current revision; returns newly embedded chunks."""
        try:
            with self._writer_lock(ns):
                manifest = self._load_manifest(ns)
                chunks = chunk(render_document(doc), doc_id=doc.doc_id)
                known = set(manifest["rows"])
                fresh = [c for c in chunks if c.content_hash not in known]
                if fresh:
                    vectors = np.stack([self.embedder.embed(c.text) for c in fresh])
                    with open(self._ns_dir(ns) / "vectors.bin", "ab") as fh:
                        fh.write(vectors.astype(np.float32).tobytes())
                    manifest["rows"].extend(c.content_hash for c in fresh)
                manifest["documents"][doc.doc_id] = [c.content_hash for c in chunks]
                self._save_manifest(ns, manifest)
                return len(fresh)
        except Timeout as exc:
            raise IndexLocked(str(exc)) from exc

    def retrieve(self, ns: Namespace, query: str, k: int = 1) -> list[Retrieved]:
        """Cosine top-k over the namespace, deduplicated to documents.

        A document scores as its best chunk; ties break by ascending
        doc_id. Empty namespace returns an empty list.
        """
        ns_dir = self._ns_dir(ns)
        if not (ns_dir / "manifest.json").is_file():
            return []
        manifest = self._load_manifest(ns)
        if not manifest["documents"]:
            return []
        vectors = self._load_vectors(ns, len(manifest["rows"]))
        row_of = {h: i for i, h in enumerate(manifest["rows"])}
        query_vec = self.embedder.embed(query)
        scored: list[Retrieved] = []
        for doc_id, hashes in manifest["documents"].items():
            rows = [row_of[h] for h in hashes if h in row_of]
            if not rows:
                continue
            best = float(np.max(vectors[rows] @ query_vec))
            scored.append(Retrieved(doc_id=doc_id, score=best))
        scored.sort(key=lambda r: (-r.score, r.doc_id))
        return scored[:k]

    def document_ids(self, ns: Namespace) -> list[str]:
        if not (self._ns_dir(ns) / "manifest.json").is_file():
            return []
        return sorted(self._load_manifest(ns)["documents"])
