import itertools
import sys
import random

import pytest

from pdms import FqMatrix, SchemeParams, build_scheme

# Step-1 Cauchy source of the worked example, over F_11.
REF_SOURCE = [
    [2, 1, 6, 3, 7, 9],
    [8, 6, 4, 9, 5, 2],
    [7, 4, 3, 2, 10, 8],
    [10, 9, 2, 7, 1, 5],
    [4, 5, 10, 1, 9, 6],
]
REF_ZEROED = [
    [0, 4, 1, 8, 8, 6],
    [0, 7, 6, 7, 9, 1],
    [0, 9, 2, 3, 8, 3],
    [0, 2, 10, 10, 6, 1],
    [4, 5, 10, 1, 9, 6],
]
REF_G = [
    [0, 1, 6, 0, 0, 7],
    [0, 6, 4, 0, 0, 0],
    [0, 0, 0, 2, 10, 7],
    [0, 0, 0, 7, 1, 1],
    [4, 5, 10, 1, 9, 6],
]
REF_PARAMS = SchemeParams(q=11, n=6, k=5, mu=1, p=2)


@pytest.fixture
def example_params():
    return REF_PARAMS


@pytest.fixture
def gpp():
    return FqMatrix(REF_SOURCE, 11)


@pytest.fixture
def example_scheme(gpp):
    return build_scheme(REF_PARAMS, gpp)


def brute_det(rows, q):
    """Cofactor expansion; independent of the elimination kernels."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0] % q
    total = 0
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        total += (-1) ** j * rows[0][j] * brute_det(minor, q)
    return total % q


def brute_in_span(cols, target, q):
    """Enumerate every coefficient vector: is ``target`` a combination of ``cols``?"""
    k = len(target)
    for coeffs in itertools.product(range(q), repeat=len(cols)):
        v = [sum(c * col[t] for c, col in zip(coeffs, cols)) % q for t in range(k)]
        if v == list(target):
            return True
    return False


def small_field_source(seed=0, q=5, k=3, n=4):
    """Seeded k x n source with every k x k minor and every bottom-row entry nonzero.

    Over F_5 no 3 x 4 Cauchy (or any superregular) matrix exists: it would
    need 7 distinct points, beyond the q + 1 = 6 MDS length limit.
    """
    rng = random.Random(seed)
    while True:
        rows = [[rng.randrange(q) for _ in range(n)] for _ in range(k)]
        if 0 in rows[-1]:
            continue
        if all(brute_det([[r[c] for c in cols] for r in rows], q)
               for cols in itertools.combinations(range(n), k)):
            return FqMatrix(rows, q)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.format_results():
        terminalreporter.write_line(line)
