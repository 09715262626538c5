"""Text embedding backends.

The default backend is a deterministic hashing embedder: every token gets a
fixed pseudo-random unit-range vector derived from its SHA-256 digest, and a
text embeds as the sum of its token vectors. No model download, no RNG state,
byte-identical across platforms and processes.
"""

from __future__ import annotations

import hashlib
import os
import re
from functools import lru_cache
from typing import Optional, Protocol

import numpy as np

from ..errors import BackendConfigError, EmbeddingBackendUnavailable

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class Embedder(Protocol):
    name: str
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric runs; everything else is a separator."""
    return _TOKEN_RE.findall(text.lower())


@lru_cache(maxsize=65536)
def _token_vector(token: str, dim: int) -> np.ndarray:
    blocks = []
    need = dim * 4
    counter = 0
    while sum(len(b) for b in blocks) < need:
        blocks.append(
            hashlib.sha256(token.encode("utf-8") + b"\x00" + counter.to_bytes(4, "big")).digest()
        )
        counter += 1
    raw = b"".join(blocks)[:need]
    u32 = np.frombuffer(raw, dtype=">u4").astype(np.float64)
    vec = u32 / 2.0**31 - 1.0  # map [0, 2^32) onto [-1, 1)
    vec.setflags(write=False)
    return vec


class HashEmbedder:
    """Deterministic bag-of-tokens embedder, dispatch name ``hash-v1-<dim>``."""

    def __init__(self, dimension: int = 256):
        if dimension < 8:
            raise ValueError("dimension must be >= 8")
        self.dimension = dimension
        self.name = f"hash-v1-{dimension}"

    def embed(self, text: str) -> np.ndarray:
        tokens = tokenize(text)
        out = np.zeros(self.dimension, dtype=np.float64)
        for tok in tokens:
            out += _token_vector(tok, self.dimension)
        return out


class RemoteEmbedder:
    """Embeddings from an OpenAI-compatible /embeddings endpoint."""

    def __init__(self, endpoint: str, model: str, dimension: int,
                 token: Optional[str] = None, timeout: float = 60.0):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.dimension = dimension
        self.token = token
        self.timeout = timeout
        self.name = f"remote:{model}:{dimension}"

    def embed(self, text: str) -> np.ndarray:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = requests.post(
                f"{self.endpoint}/embeddings",
                json={"model": self.model, "input": [text]},
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            data = resp.json()["data"][0]["embedding"]
        except Exception as exc:
            raise EmbeddingBackendUnavailable(f"embedding request failed: {exc}") from exc
        vec = np.asarray(data, dtype=np.float64)
        if vec.shape != (self.dimension,):
            raise EmbeddingBackendUnavailable(
                f"endpoint returned {vec.shape[0] if vec.ndim == 1 else vec.shape} dims, "
                f"expected {self.dimension}"
            )
        return vec


def get_embedder(name: str, endpoint: Optional[str] = None,
                 token: Optional[str] = None) -> Embedder:
    """Resolve an embedder identifier like ``hash-v1-256`` or ``remote:<model>:<dim>``."""
    if name.startswith("hash-v1-"):
        try:
            dim = int(name.removeprefix("hash-v1-"))
        except ValueError:
            raise BackendConfigError(f"bad hash embedder name {name!r}") from None
        return HashEmbedder(dim)
    if name.startswith("remote:"):
        parts = name.split(":")
        if len(parts) != 3:
            raise BackendConfigError(f"bad remote embedder name {name!r}")
        _, model, dim_s = parts
        try:
            dim = int(dim_s)
        except ValueError:
            raise BackendConfigError(f"bad remote embedder dimension in {name!r}") from None
        endpoint = endpoint or os.environ.get("REFPT_ENDPOINT")
        if not endpoint:
            raise BackendConfigError("remote embedder needs an endpoint (REFPT_ENDPOINT)")
        token = token or os.environ.get("REFPT_API_TOKEN")
        return RemoteEmbedder(endpoint, model, dim, token=token)
    raise BackendConfigError(f"unknown embedder {name!r}")
