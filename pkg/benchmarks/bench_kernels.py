"""Compare the compiled and pure-Python string kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so this works whatever
SCHEMAFORGE_PURE_PYTHON says. Results are checked for agreement first.
"""

from __future__ import annotations

import argparse
import random
import string
import timeit

from schemaforge import _pykernels

try:
    from schemaforge import _kernels
except ImportError:
    _kernels = None


def make_words(rng: random.Random, n: int) -> list[str]:
    return ["".join(rng.choices(string.ascii_lowercase, k=rng.randint(2, 10))) for _ in range(n)]


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    pairs = [(a, b) for a, b in zip(make_words(rng, 2000), make_words(rng, 2000))]
    questions = [make_words(rng, rng.randint(8, 25)) for _ in range(200)]
    phrases = [" ".join(make_words(rng, rng.randint(1, 3))) for _ in range(200)]

    backends = {"python": _pykernels}
    if _kernels is None:
        print("compiled extension not built; timing the Python kernels only")
    else:
        backends["cython"] = _kernels
        for a, b in pairs[:200]:
            assert _kernels.levenshtein(a, b) == _pykernels.levenshtein(a, b)
        for q, p in zip(questions, phrases):
            assert _kernels.best_window(q, p, 5) == _pykernels.best_window(q, p, 5)

    workloads = {
        "levenshtein x2000": lambda k: [k.levenshtein(a, b) for a, b in pairs],
        "best_window x200": lambda k: [k.best_window(q, p, 5) for q, p in zip(questions, phrases)],
    }
    print(f"{'workload':<20}{'backend':<10}{'best (ms)':>12}{'speedup':>10}")
    for name, work in workloads.items():
        times = {b: min(timeit.repeat(lambda: work(k), number=1, repeat=args.repeat)) for b, k in backends.items()}
        for b, t in times.items():
            print(f"{name:<20}{b:<10}{t * 1e3:>12.2f}{times['python'] / t:>9.1f}x")


if __name__ == "__main__":
    main()
