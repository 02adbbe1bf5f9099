"""Pure-Python reference versions of the matching kernels.

Used when the compiled ``_kernels`` extension is unavailable, and as the
comparison baseline in ``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

from collections.abc import Sequence


def levenshtein(a: str, b: str) -> int:
    """Character-level edit distance (unit-cost insert/delete/substitute)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def best_window(tokens: Sequence[str], phrase: str, max_len: int) -> tuple[int, int, int, int] | None:
    """Find the token window closest to ``phrase``.

    Windows of 1..max_len tokens are space-joined and compared by
    ``levenshtein(window, phrase) / max(len(window), len(phrase))``.
    Returns ``(start, end, distance, denominator)`` for the minimum, ties
    going to the longer window and then the leftmost one. Fractions are
    compared exactly by cross-multiplication.
    """
    n = len(tokens)
    lp = len(phrase)
    best = None
    bnum, bden = 1, 0
    for length in range(min(max_len, n), 0, -1):
        for start in range(n - length + 1):
            window = " ".join(tokens[start : start + length])
            lw = len(window)
            den = max(lw, lp)
            if den == 0:
                continue
            # |lw - lp| bounds the distance from below
            if best is not None and abs(lw - lp) * bden > bnum * den:
                continue
            d = levenshtein(window, phrase)
            if best is None or d * bden < bnum * den:
                best = (start, start + length, d, den)
                bnum, bden = d, den
    return best
