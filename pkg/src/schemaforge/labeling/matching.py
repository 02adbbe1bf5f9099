from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from schemaforge import kernels
from schemaforge.errors import ContractViolation
from schemaforge.text import Question, tokenize

# windows may exceed the phrase by this many tokens
WINDOW_SLACK = 2


@dataclass(frozen=True)
class Match:
    span: tuple[int, int]
    distance: float
    # exact fraction, kept for tie-breaking across phrases
    num: int = 0
    den: int = 1

    @property
    def length(self) -> int:
        return self.span[1] - self.span[0]


def _tokens(question: Question | Sequence[str]) -> Sequence[str]:
    return question.tokens if isinstance(question, Question) else question


def best_match(question: Question | Sequence[str], phrase: str) -> Match | None:
    """Closest window to ``phrase`` regardless of any threshold."""
    norm = " ".join(tokenize(phrase))
    if not norm:
        return None
    max_len = len(tokenize(phrase)) + WINDOW_SLACK
    found = kernels.best_window(_tokens(question), norm, max_len)
    if found is None:
        return None
    start, end, num, den = found
    return Match((start, end), num / den, num, den)


def ngram_match(question: Question | Sequence[str], phrase: str, tau: float) -> Match | None:
    """Match ``phrase`` against contiguous windows of the question.

    Distance is character Levenshtein between the space-joined window and
    the normalized phrase, divided by the longer of the two lengths. The
    best window is returned if its distance is at most ``tau``.
    """
    if not 0.0 <= tau <= 1.0:
        raise ContractViolation(f"tau must lie in [0, 1], got {tau}")
    m = best_match(question, phrase)
    if m is None or m.distance > tau:
        return None
    return m


def better(a: Match, b: Match | None) -> bool:
    """True if ``a`` beats ``b``: lower distance, then longer, then leftmost."""
    if b is None:
        return True
    lhs, rhs = a.num * b.den, b.num * a.den
    if lhs != rhs:
        return lhs < rhs
    if a.length != b.length:
        return a.length > b.length
    return a.span[0] < b.span[0]


def best_of(question: Question | Sequence[str], phrases: Sequence[str]) -> Match | None:
    best = None
    for phrase in phrases:
        m = best_match(question, phrase)
        if m is not None and better(m, best):
            best = m
    return best
