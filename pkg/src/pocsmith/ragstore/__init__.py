from ..knowledge.documents import Namespace
from .chunking import CHUNK_CHARS, Chunk, chunk, content_hash
from .embedders import HashedEmbedder, OpenAIEmbedder, make_embedder
from .index import Retrieved, VectorIndex

__all__ = [
    "Namespace",
    "CHUNK_CHARS",
    "Chunk",
    "chunk",
    "content_hash",
    "HashedEmbedder",
    "OpenAIEmbedder",
    "make_embedder",
    "Retrieved",
    "VectorIndex",
]
