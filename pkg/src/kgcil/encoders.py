"""Deterministic text encoders used by the similarity classifier.

The default encoder hashes lowercase alphanumeric tokens into a fixed number
of buckets with 64-bit FNV-1a and L2-normalizes the counts. It is a stand-in
for a learned embedding model: cheap, reproducible, and good enough to rank
texts by token overlap.
"""

from __future__ import annotations

import re

import numpy as np

_TOKEN_RE = re.compile(r"[a-z0-9]+")

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & _MASK
    return h


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


class HashingEncoder:
    """Bag of hashed tokens; output is unit-norm (or all-zero for empty text)."""

    id = "hashing"

    def __init__(self, dimension: int = 256):
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        self.dimension = dimension
        self._buckets: dict[str, int] = {}

    def _bucket(self, token: str) -> int:
        b = self._buckets.get(token)
        if b is None:
            b = fnv1a_64(token.encode("utf-8")) % self.dimension
            self._buckets[token] = b
        return b

    def encode(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension)
        for token in _TOKEN_RE.findall(text.lower()):
            vec[self._bucket(token)] += 1.0
        norm = np.linalg.norm(vec)
        if norm:
            vec /= norm
        return vec

    def to_config(self) -> dict:
        return {"id": self.id, "dimension": self.dimension}


def encoder_from_config(cfg: dict) -> HashingEncoder:
    kind = cfg.get("id", "hashing")
    if kind != "hashing":
        raise ValueError(f"unknown encoder id: {kind!r}")
    return HashingEncoder(dimension=int(cfg.get("dimension", 256)))
