"""Reference kernels in plain Python (plus numpy for bulk products).

Every function here has a twin in ``_kernels.pyx`` with the same
signature and results.  Inputs are 2-D ``int64`` arrays holding
canonical residues mod ``q``.
"""

from itertools import combinations

import numpy as np


def _inv(a, q):
    return pow(a, q - 2, q)


def matmul(a, b, q):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for j in range(a.shape[1]):
        # each term < 2^62, out < q: no int64 overflow
        out = (out + a[:, j, None] * b[j]) % q
    return out


def _reduce(rows, ncols, q, upto=None):
    """In-place RREF over the first ``upto`` columns; returns pivot list."""
    rk = 0
    pivots = []
    nrows = len(rows)
    for c in range(ncols if upto is None else upto):
        piv = None
        for i in range(rk, nrows):
            if rows[i][c]:
                piv = i
                break
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        pr = rows[rk]
        iv = _inv(pr[c], q)
        if iv != 1:
            pr = rows[rk] = [x * iv % q for x in pr]
        for i in range(nrows):
            if i != rk:
                f = rows[i][c]
                if f:
                    rows[i] = [(x - f * y) % q for x, y in zip(rows[i], pr)]
        pivots.append(c)
        rk += 1
        if rk == nrows:
            break
    return pivots


def rref(a, q):
    rows = np.asarray(a, dtype=np.int64).tolist()
    ncols = np.shape(a)[1]
    pivots = _reduce(rows, ncols, q)
    return np.array(rows, dtype=np.int64).reshape(np.shape(a)), pivots


def det(a, q):
    rows = np.asarray(a, dtype=np.int64).tolist()
    n = len(rows)
    d = 1
    for c in range(n):
        piv = None
        for i in range(c, n):
            if rows[i][c]:
                piv = i
                break
        if piv is None:
            return 0
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            d = -d
        pr = rows[c]
        d = d * pr[c] % q
        iv = _inv(pr[c], q)
        for i in range(c + 1, n):
            f = rows[i][c]
            if f:
                f = f * iv % q
                rows[i] = [(x - f * y) % q for x, y in zip(rows[i], pr)]
    return d % q


def inverse(a, q):
    """Return ``(inverse, -1)`` or ``(None, failing_pivot_column)``."""
    n = np.shape(a)[0]
    rows = [list(r) + [int(i == j) for j in range(n)]
            for i, r in enumerate(np.asarray(a, dtype=np.int64).tolist())]
    pivots = _reduce(rows, 2 * n, q, upto=n)
    if len(pivots) < n:
        missing = next(c for c in range(n) if c not in pivots)
        return None, missing
    return np.array([r[n:] for r in rows], dtype=np.int64).reshape(n, n), -1


def spanned_units(m, q, count):
    """Indices ``i < count`` with e_i in the column space of ``m``."""
    m = np.asarray(m, dtype=np.int64)
    if m.shape[1] == 0:
        return []
    rows = m.T.tolist()
    _reduce(rows, m.shape[0], q)
    hits = []
    for r in rows:
        nz = [j for j, x in enumerate(r) if x]
        if len(nz) == 1 and nz[0] < count:
            hits.append(nz[0])
    return sorted(hits)


def first_singular_minor(a, q, order):
    """First (rows, cols) pair, lexicographically, whose minor is zero."""
    a = np.asarray(a, dtype=np.int64)
    for rs in combinations(range(a.shape[0]), order):
        sub_rows = a[list(rs)]
        for cs in combinations(range(a.shape[1]), order):
            if det(sub_rows[:, list(cs)], q) == 0:
                return rs, cs
    return None
