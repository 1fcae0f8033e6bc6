"""Fixed-window chunking.

Documents are authored to fit one retrieval window, so the window size
doubles as the document length target: 1500 characters, non-overlapping,
last chunk may run short.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from ..errors import EmptyDocument

CHUNK_CHARS = 1500


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    ordinal: int
    text: str

    def __post_init__(self) -> None:
        if len(self.text) > CHUNK_CHARS:
            raise ValueError(f"chunk exceeds {CHUNK_CHARS} characters")

    @property
    def content_hash(self) -> str:
        return content_hash(self.text)


def chunk(text: str, doc_id: str = "") -> list[Chunk]:
    """Split text into fixed 1500-character windows.

    Concatenating the chunks in ordinal order reproduces the input.
    """
    if not text:
        raise EmptyDocument("cannot chunk empty text")
    return [
        Chunk(doc_id=doc_id, ordinal=i, text=text[start : start + CHUNK_CHARS])
        for i, start in enumerate(range(0, len(text), CHUNK_CHARS))
    ]
