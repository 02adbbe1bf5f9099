"""Schema-aware curriculum: length-based difficulty, square-root competence
schedule, and competence-filtered batch sampling."""

from __future__ import annotations

import math
import random
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass

from schemaforge.errors import ContractViolation
from schemaforge.example import PretrainExample, derive_seed
from schemaforge.schema import Schema
from schemaforge.text import column_tokens


def input_length(example: PretrainExample, schema: Schema) -> int:
    """Question tokens plus column-name tokens of the whole schema."""
    return len(example.question.tokens) + sum(len(column_tokens(c.name)) for _, c in schema.iter_columns())


def minmax_scale(lengths: Sequence[float]) -> list[float]:
    if not lengths:
        raise ContractViolation("cannot scale an empty corpus")
    lo, hi = min(lengths), max(lengths)
    if hi == lo:
        return [0.0] * len(lengths)
    return [(x - lo) / (hi - lo) for x in lengths]


def compute_difficulties(corpus: Sequence[PretrainExample], schemas: Mapping[str, Schema]) -> list[float]:
    return minmax_scale([input_length(ex, schemas[ex.schema_id]) for ex in corpus])


def competence(t: int, T: int, min_d: float) -> float:
    """c(t) = sqrt(t * (1 - min_d^2) / T + min_d^2), clamped to [min_d, 1].

    The endpoints are returned exactly (``min_d`` at t=0, 1.0 at t=T).
    """
    if T < 1 or not 0 <= t <= T or not 0.0 <= min_d <= 1.0:
        raise ContractViolation(f"competence needs 0 <= t <= T, T >= 1, min_d in [0, 1]; got {t}, {T}, {min_d}")
    if t == 0:
        return float(min_d)
    if t == T:
        return 1.0
    m2 = min_d * min_d
    c = math.sqrt(t * (1.0 - m2) / T + m2)
    return min(1.0, max(float(min_d), c))


@dataclass(frozen=True)
class CurriculumState:
    difficulties: tuple[float, ...]
    T: int
    t: int = 0

    def __post_init__(self):
        if not self.difficulties:
            raise ContractViolation("curriculum needs at least one example")
        if any(not 0.0 <= d <= 1.0 for d in self.difficulties):
            raise ContractViolation("difficulties must lie in [0, 1]")
        if self.T < 1 or not 0 <= self.t <= self.T:
            raise ContractViolation(f"need 0 <= t <= T and T >= 1, got t={self.t}, T={self.T}")

    @property
    def min_d(self) -> float:
        return min(self.difficulties)

    @property
    def competence(self) -> float:
        return competence(self.t, self.T, self.min_d)

    def at(self, t: int) -> CurriculumState:
        return CurriculumState(self.difficulties, self.T, t)

    def admissible(self) -> list[int]:
        c = self.competence
        return [i for i, d in enumerate(self.difficulties) if d <= c]


def sample_batch(state: CurriculumState, batch_size: int, seed: int = 0) -> list[int]:
    """Uniform draw without replacement from examples with d <= c(t).

    An underfull pool is topped up with the easiest remaining examples
    (ascending difficulty, then index); the padding follows the sampled
    part of the batch.
    """
    if batch_size < 1:
        raise ContractViolation("batch_size must be >= 1")
    pool = state.admissible()
    rng = random.Random(seed)
    if len(pool) >= batch_size:
        return rng.sample(pool, batch_size)
    picked = rng.sample(pool, len(pool))
    chosen = set(pool)
    rest = sorted((i for i in range(len(state.difficulties)) if i not in chosen), key=lambda i: (state.difficulties[i], i))
    return picked + rest[: batch_size - len(pool)]


def batch_seed(seed: int, t: int) -> int:
    return derive_seed(seed, f"batch-{t}")


def curriculum_trace(state: CurriculumState, batch_size: int, seed: int = 0) -> Iterator[tuple[int, float, int, list[int]]]:
    """(t, c(t), pool size, sampled indices) for t = 0 .. T-1."""
    for t in range(state.T):
        s = state.at(t)
        yield t, s.competence, len(s.admissible()), sample_batch(s, batch_size, batch_seed(seed, t))
