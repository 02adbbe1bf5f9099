"""Deterministic stand-in for a pre-trained encoder."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from schemaforge.errors import ContractViolation
from schemaforge.example import derive_seed
from schemaforge.text import SerializedInput


@lru_cache(maxsize=65536)
def _token_vector(token: str, h: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(derive_seed(seed, token))
    vec = rng.standard_normal(h)
    vec.setflags(write=False)
    return vec


def _positions(length: int, h: int) -> np.ndarray:
    pos = np.arange(length, dtype=np.float64)[:, None]
    freq = 1.0 / (100.0 ** (np.arange(0, h, 2, dtype=np.float64) / h))
    enc = np.zeros((length, h))
    enc[:, 0::2] = np.sin(pos * freq)
    enc[:, 1::2] = np.cos(pos * freq[: h // 2])
    return 0.5 * enc


def encode_tokens(tokens, h: int = 32, seed: int = 0) -> np.ndarray:
    """Unit-variance hash embeddings plus positions, then 1-neighbour averaging."""
    if h < 2:
        raise ContractViolation("embedding size must be >= 2")
    n = len(tokens)
    if n == 0:
        return np.zeros((0, h))
    x = np.stack([_token_vector(t, h, seed) for t in tokens]) + _positions(n, h)
    total = x.copy()
    count = np.ones((n, 1))
    total[1:] += x[:-1]
    count[1:] += 1
    total[:-1] += x[1:]
    count[:-1] += 1
    return total / count


def toy_encode(inp: SerializedInput, h: int = 32, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Return question rows ``Q`` (n x h) and column-anchor rows ``S`` (m x h)."""
    hidden = encode_tokens(inp.tokens, h, seed)
    q0, q1 = inp.question_span
    anchors = inp.anchor_positions
    return hidden[q0:q1].copy(), hidden[anchors].reshape(len(anchors), h)
