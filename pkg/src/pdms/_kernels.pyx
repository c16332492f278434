# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``."""

import numpy as np

ctypedef long long i64


cdef inline i64 _inv(i64 a, i64 q) nogil:
    cdef i64 r0 = q, r1 = a % q, t0 = 0, t1 = 1, quot, tmp
    while r1 != 0:
        quot = r0 // r1
        tmp = r0 - quot * r1
        r0 = r1
        r1 = tmp
        tmp = t0 - quot * t1
        t0 = t1
        t1 = tmp
    t0 %= q
    if t0 < 0:
        t0 += q
    return t0


cdef inline i64 _mod(i64 x, i64 q) nogil:
    x %= q
    if x < 0:
        x += q
    return x


def matmul(a, b, long long q):
    cdef const i64[:, ::1] A = np.ascontiguousarray(a, dtype=np.int64)
    cdef const i64[:, ::1] B = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t n = A.shape[0], m = A.shape[1], p = B.shape[1]
    out = np.zeros((n, p), dtype=np.int64)
    cdef i64[:, ::1] C = out
    cdef Py_ssize_t i, j, l
    cdef i64 aij
    with nogil:
        for i in range(n):
            for j in range(m):
                aij = A[i, j]
                if aij == 0:
                    continue
                for l in range(p):
                    C[i, l] = (C[i, l] + aij * B[j, l]) % q
    return out


cdef Py_ssize_t _reduce(i64[:, ::1] M, Py_ssize_t upto, i64 q, Py_ssize_t* pivots) nogil:
    cdef Py_ssize_t nrows = M.shape[0], ncols = M.shape[1]
    cdef Py_ssize_t rk = 0, c, i, j, piv
    cdef i64 iv, f, tmp
    for c in range(upto):
        piv = -1
        for i in range(rk, nrows):
            if M[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rk:
            for j in range(ncols):
                tmp = M[rk, j]
                M[rk, j] = M[piv, j]
                M[piv, j] = tmp
        iv = _inv(M[rk, c], q)
        if iv != 1:
            for j in range(ncols):
                M[rk, j] = M[rk, j] * iv % q
        for i in range(nrows):
            if i != rk:
                f = M[i, c]
                if f != 0:
                    for j in range(ncols):
                        M[i, j] = _mod(M[i, j] - f * M[rk, j], q)
        pivots[rk] = c
        rk += 1
        if rk == nrows:
            break
    return rk


def rref(a, long long q):
    out = np.array(a, dtype=np.int64, order="C", copy=True)
    if out.ndim != 2:
        raise ValueError("expected a 2-D array")
    cdef i64[:, ::1] M = out
    cdef Py_ssize_t cap = min(M.shape[0], M.shape[1])
    piv = np.zeros(max(cap, 1), dtype=np.intp)
    cdef Py_ssize_t[::1] P = piv
    cdef Py_ssize_t rk = 0
    if M.shape[0] and M.shape[1]:
        rk = _reduce(M, M.shape[1], q, &P[0])
    return out, [int(x) for x in piv[:rk]]


cdef i64 _det(i64[:, ::1] M, i64 q) nogil:
    cdef Py_ssize_t n = M.shape[0], c, i, j, piv
    cdef i64 d = 1, iv, f, tmp
    for c in range(n):
        piv = -1
        for i in range(c, n):
            if M[i, c] != 0:
                piv = i
                break
        if piv < 0:
            return 0
        if piv != c:
            for j in range(n):
                tmp = M[c, j]
                M[c, j] = M[piv, j]
                M[piv, j] = tmp
            d = q - d
        d = d * M[c, c] % q
        iv = _inv(M[c, c], q)
        for i in range(c + 1, n):
            f = M[i, c]
            if f != 0:
                f = f * iv % q
                for j in range(c, n):
                    M[i, j] = _mod(M[i, j] - f * M[c, j], q)
    return d % q


def det(a, long long q):
    out = np.array(a, dtype=np.int64, order="C", copy=True)
    if out.shape[0] == 0:
        return 1
    return int(_det(out, q))


def inverse(a, long long q):
    cdef Py_ssize_t n = np.shape(a)[0]
    aug = np.zeros((n, 2 * n), dtype=np.int64)
    aug[:, :n] = a
    aug[:, n:] = np.eye(n, dtype=np.int64)
    cdef i64[:, ::1] M = aug
    piv = np.zeros(max(n, 1), dtype=np.intp)
    cdef Py_ssize_t[::1] P = piv
    cdef Py_ssize_t rk = 0, c
    if n:
        rk = _reduce(M, n, q, &P[0])
    if rk < n:
        found = set(int(x) for x in piv[:rk])
        for c in range(n):
            if c not in found:
                return None, c
    return np.ascontiguousarray(aug[:, n:]), -1


def spanned_units(m, long long q, Py_ssize_t count):
    m = np.asarray(m, dtype=np.int64)
    if m.shape[1] == 0:
        return []
    reduced, _ = rref(m.T, q)
    cdef i64[:, ::1] R = reduced
    cdef Py_ssize_t i, j, nz, last
    hits = []
    for i in range(R.shape[0]):
        nz = 0
        last = -1
        for j in range(R.shape[1]):
            if R[i, j] != 0:
                nz += 1
                last = j
                if nz > 1:
                    break
        if nz == 1 and last < count:
            hits.append(last)
    return sorted(hits)


cdef bint _next_comb(Py_ssize_t* idx, Py_ssize_t k, Py_ssize_t n) nogil:
    cdef Py_ssize_t i = k - 1, j
    while i >= 0 and idx[i] == n - k + i:
        i -= 1
    if i < 0:
        return False
    idx[i] += 1
    for j in range(i + 1, k):
        idx[j] = idx[j - 1] + 1
    return True


def first_singular_minor(a, long long q, Py_ssize_t order):
    A_arr = np.ascontiguousarray(a, dtype=np.int64)
    cdef const i64[:, ::1] A = A_arr
    cdef Py_ssize_t nr = A.shape[0], nc = A.shape[1], i, j
    if order < 1 or order > nr or order > nc:
        return None
    ridx_arr = np.arange(order, dtype=np.intp)
    cidx_arr = np.arange(order, dtype=np.intp)
    scratch_arr = np.zeros((order, order), dtype=np.int64)
    cdef Py_ssize_t[::1] ridx = ridx_arr
    cdef Py_ssize_t[::1] cidx = cidx_arr
    cdef i64[:, ::1] S = scratch_arr
    cdef bint found = False
    with nogil:
        while True:
            for j in range(order):
                cidx[j] = j
            while True:
                for i in range(order):
                    for j in range(order):
                        S[i, j] = A[ridx[i], cidx[j]]
                if _det(S, q) == 0:
                    found = True
                    break
                if not _next_comb(&cidx[0], order, nc):
                    break
            if found or not _next_comb(&ridx[0], order, nr):
                break
    if found:
        return tuple(int(x) for x in ridx_arr), tuple(int(x) for x in cidx_arr)
    return None
