"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each row reports the best-of-N wall time per call for both backends on
the same inputs, plus the speedup.  Outputs are checked for equality
before timing.
"""

from __future__ import annotations

import argparse
import random
import sys
import timeit

import numpy as np

from pdms import kernels
from pdms.construction import SchemeParams, build_scheme


def cases(rng: np.random.Generator):
    q = 257
    sq8 = rng.integers(0, q, (8, 8))
    sq32 = rng.integers(0, q, (32, 32))
    wide = rng.integers(0, q, (24, 48))
    a, b = rng.integers(0, q, (64, 64)), rng.integers(0, q, (64, 64))
    scheme = build_scheme(SchemeParams(1009, 10, 8, 2, 2), seed=1)
    g = scheme.G.array
    src = np.ascontiguousarray(scheme.source.array)  # superregular: no minor vanishes
    cols = np.ascontiguousarray(g[:, [0, 3, 5]])
    return [
        ("matmul 64x64", "matmul", (a, b, q)),
        ("det 8x8", "det", (sq8, q)),
        ("det 32x32", "det", (sq32, q)),
        ("inverse 32x32", "inverse", (sq32, q)),
        ("rref 24x48", "rref", (wide, q)),
        ("spanned_units 8x3", "spanned_units", (cols, 1009, 6)),
        ("all 8x8 minors of 8x10", "first_singular_minor", (src, 1009, 8)),
        ("all 4x4 minors of 8x10", "first_singular_minor", (src, 1009, 4)),
    ]


def same(x, y) -> bool:
    if isinstance(x, tuple):
        return len(x) == len(y) and all(same(a, b) for a, b in zip(x, y))
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        return np.array_equal(np.asarray(x), np.asarray(y))
    return x == y


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    fast, slow = kernels.compiled_backend, kernels.python_backend
    if fast is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    random.seed(0)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'compiled':>12}{'python':>12}{'speedup':>10}")
    for label, name, inputs in cases(rng):
        f, s = getattr(fast, name), getattr(slow, name)
        if not same(f(*inputs), s(*inputs)):
            print(f"{label}: backends disagree", file=sys.stderr)
            return 2
        tf = min(timeit.repeat(lambda: f(*inputs), number=1, repeat=args.repeat))
        ts = min(timeit.repeat(lambda: s(*inputs), number=1, repeat=args.repeat))
        print(f"{label:<26}{tf * 1e3:>10.3f}ms{ts * 1e3:>10.3f}ms{ts / tf:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
