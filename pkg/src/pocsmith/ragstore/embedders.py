"""Embedding backends.

The offline embedder is a deterministic feature-hashed bag of words
(unigrams plus word bigrams) in 256 dimensions, L2-normalized. It is a
dependency-free stand-in chosen for reproducibility, not a fidelity
claim about any hosted embedding model.
"""

from __future__ import annotations

import hashlib
import os
import re
from typing import Protocol

import numpy as np

from ..errors import BackendUnavailable

OFFLINE_DIM = 256
_WORD = re.compile(r"[a-z0-9_]+")


class Embedder(Protocol):
    embedder_id: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class HashedEmbedder:
    """Signed feature hashing over word unigrams and bigrams."""

    embedder_id = "hashed-bow-256"
    dim = OFFLINE_DIM

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        words = _WORD.findall(text.lower())
        features = words + [f"{a} {b}" for a, b in zip(words, words[1:])]
        vector = np.zeros(self.dim, dtype=np.float32)
        for feature in features:
            digest = hashlib.sha256(feature.encode()).digest()
            index = int.from_bytes(digest[:4], "little") % self.dim
            sign = 1.0 if digest[4] & 1 else -1.0
            vector[index] += sign
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            vector[0] = 1.0
            norm = 1.0
        return vector / norm


class OpenAIEmbedder:
    """Hosted embedding endpoint (OpenAI-compatible wire format)."""

    def __init__(
        self,
        model: str = "text-embedding-3-large",
        base_url: str = "https://api.openai.com/v1",
        api_key_env: str = "UGEN_OPENAI_KEY",
        dim: int = 3072,
    ):
        self.embedder_id = model
        self.dim = dim
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env

    def embed(self, text: str) -> np.ndarray:
        import httpx

        key = os.environ.get(self.api_key_env, "")
        if not key:
            raise BackendUnavailable(f"missing API key in ${self.api_key_env}")
        try:
            response = httpx.post(
                f"{self.base_url}/embeddings",
                headers={"Authorization": f"Bearer {key}"},
                json={"model": self.embedder_id, "input": text},
                timeout=60.0,
            )
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"embedding request failed: {exc}") from exc
        values = response.json()["data"][0]["embedding"]
        vector = np.asarray(values, dtype=np.float32)
        norm = float(np.linalg.norm(vector))
        return vector / norm if norm else vector


def make_embedder(name: str = "offline") -> Embedder:
    if name in ("offline", HashedEmbedder.embedder_id):
        return HashedEmbedder()
    if name in ("live", "text-embedding-3-large"):
        return OpenAIEmbedder()
    raise ValueError(f"unknown embedder {name!r}")
