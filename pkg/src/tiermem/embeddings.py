"""Text embeddings for archival search.

The default embedder is a deterministic hashed bag-of-words: lowercase
alphanumeric tokens, crc32 into a fixed number of buckets, counts
L2-normalized. No semantics, but ranking by shared vocabulary is exactly
what the benchmarks need and it never changes between runs or machines.

An HTTP-backed embedder can be swapped in for real deployments; endpoint and
credentials come from the environment, never from config files on disk.
"""

from __future__ import annotations

import os
import re
import zlib
from typing import Protocol, Sequence

import numpy as np

DEFAULT_DIM = 256

_TOKEN = re.compile(r"[a-z0-9]+")


class Embedder(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class HashedBagEmbedder:
    """Deterministic bag-of-words hashing; unit-norm output (zero vector for
    token-less text, which only a punctuation-only string can produce)."""

    def __init__(self, dim: int = DEFAULT_DIM) -> None:
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.float64)
        for tok in _TOKEN.findall(text.lower()):
            v[zlib.crc32(tok.encode("utf-8")) % self.dim] += 1.0
        norm = float(np.linalg.norm(v))
        if norm > 0.0:
            v /= norm
        return v

    def describe(self) -> dict:
        return {"type": "hashed-bow", "dim": self.dim}


class HttpEmbedder:
    """POSTs {"texts": [...]} to $TIERMEM_EMBED_URL, expects {"vectors": [[...]]}.
    Vectors are re-normalized on receipt so the unit-norm invariant holds
    regardless of what the service returns."""

    def __init__(self, dim: int, url: str | None = None, timeout: float = 10.0) -> None:
        import httpx

        self.dim = dim
        self._url = url or os.environ.get("TIERMEM_EMBED_URL", "")
        if not self._url:
            raise ValueError("TIERMEM_EMBED_URL is not set")
        self._timeout = timeout
        self._headers = {}
        token = os.environ.get("TIERMEM_EMBED_TOKEN")
        if token:
            self._headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(timeout=timeout, headers=self._headers)

    def embed(self, text: str) -> np.ndarray:
        resp = self._client.post(self._url, json={"texts": [text]})
        resp.raise_for_status()
        v = np.asarray(resp.json()["vectors"][0], dtype=np.float64)
        if v.shape != (self.dim,):
            raise ValueError(f"embedding service returned shape {v.shape}, want ({self.dim},)")
        norm = float(np.linalg.norm(v))
        return v / norm if norm > 0.0 else v

    def describe(self) -> dict:
        return {"type": "http", "dim": self.dim}


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity, defined as 0.0 when either vector is zero.
    Clamped into [-1, 1]; float error can overshoot on near-parallel
    vectors."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(min(1.0, max(-1.0, np.dot(a, b) / (na * nb))))


def embedder_from_config(cfg: dict | None) -> Embedder:
    cfg = cfg or {}
    kind = cfg.get("type", "hashed-bow")
    dim = int(cfg.get("dim", DEFAULT_DIM))
    if kind == "hashed-bow":
        return HashedBagEmbedder(dim)
    if kind == "http":
        return HttpEmbedder(dim)
    raise ValueError(f"unknown embedder type: {kind!r}")


def fragments_similarity(
    query_vec: np.ndarray, fragment_vecs: Sequence[np.ndarray]
) -> list[float]:
    return [cosine(query_vec, f) for f in fragment_vecs]
