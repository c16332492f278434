"""Dense matrices over F_q.

Indices are 0-based here.  CLI and report surfaces convert to the
1-based node numbering at their own boundary.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .gf import Field


class SingularMatrixError(ArithmeticError):
    def __init__(self, pivot_col: int, msg: str = "") -> None:
        self.pivot_col = pivot_col
        super().__init__(msg or f"matrix is singular (no pivot in column {pivot_col})")


class DimensionError(ValueError):
    pass


class FqMatrix:
    """Immutable matrix of canonical residues mod ``q``."""

    __slots__ = ("_a", "field")

    def __init__(self, data, field: Field | int) -> None:
        if not isinstance(field, Field):
            field = Field(field)
        a = np.array(data, dtype=np.int64, copy=True)
        if a.ndim == 1 and a.size == 0:
            a = a.reshape(0, 0)
        if a.ndim != 2:
            raise DimensionError(f"expected 2-D data, got shape {a.shape}")
        a %= field.q
        a.setflags(write=False)
        self._a = a
        self.field = field

    @classmethod
    def _wrap(cls, a: np.ndarray, field: Field) -> FqMatrix:
        m = cls.__new__(cls)
        a = np.ascontiguousarray(a, dtype=np.int64)
        a.setflags(write=False)
        m._a = a
        m.field = field
        return m

    @classmethod
    def identity(cls, n: int, field: Field | int) -> FqMatrix:
        return cls(np.eye(n, dtype=np.int64), field)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: Field | int) -> FqMatrix:
        return cls(np.zeros((rows, cols), dtype=np.int64), field)

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the residues."""
        return self._a

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    def tolist(self) -> list[list[int]]:
        return self._a.tolist()

    def __getitem__(self, key):
        out = self._a[key]
        if isinstance(out, np.ndarray):
            if out.ndim == 2:
                return FqMatrix._wrap(out, self.field)
            return tuple(int(x) for x in out)
        return int(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FqMatrix):
            return NotImplemented
        return self.q == other.q and self.shape == other.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self) -> int:
        return hash((self.q, self.shape, self._a.tobytes()))

    def __matmul__(self, other: FqMatrix) -> FqMatrix:
        return mat_mul(self, other)

    def __repr__(self) -> str:
        body = "\n ".join(" ".join(f"{x:>{len(str(self.q - 1))}}" for x in row) for row in self.tolist())
        return f"FqMatrix(q={self.q}, {self.rows}x{self.cols}\n [{body}])"

    def transpose(self) -> FqMatrix:
        return FqMatrix._wrap(self._a.T.copy(), self.field)

    T = property(transpose)

    def hstack(self, other: FqMatrix) -> FqMatrix:
        _check_field(self, other)
        return FqMatrix._wrap(np.hstack([self._a, other._a]), self.field)

    def vstack(self, other: FqMatrix) -> FqMatrix:
        _check_field(self, other)
        return FqMatrix._wrap(np.vstack([self._a, other._a]), self.field)


def column(values: Iterable[int], field: Field | int) -> FqMatrix:
    """A column vector as an ``n x 1`` matrix."""
    vals = list(values)
    return FqMatrix(np.array(vals, dtype=np.int64).reshape(len(vals), 1), field)


def _check_field(a: FqMatrix, b: FqMatrix) -> None:
    if a.q != b.q:
        raise DimensionError(f"modulus mismatch: {a.q} vs {b.q}")


def mat_mul(a: FqMatrix, b: FqMatrix) -> FqMatrix:
    _check_field(a, b)
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return FqMatrix._wrap(kernels.matmul(a.array, b.array, a.q), a.field)


def invert(a: FqMatrix) -> FqMatrix:
    """Gauss-Jordan inverse; raises :class:`SingularMatrixError`."""
    if a.rows != a.cols:
        raise DimensionError(f"cannot invert non-square {a.shape}")
    inv, failed = kernels.inverse(a.array, a.q)
    if inv is None:
        raise SingularMatrixError(failed)
    return FqMatrix._wrap(inv, a.field)


def rank(a: FqMatrix) -> int:
    if a.rows == 0 or a.cols == 0:
        return 0
    return len(kernels.rref(a.array, a.q)[1])


def determinant(a: FqMatrix) -> int:
    if a.rows != a.cols:
        raise DimensionError(f"determinant of non-square {a.shape}")
    if a.rows == 0:
        return 1
    return int(kernels.det(a.array, a.q))


def solve(a: FqMatrix, b: FqMatrix | Sequence[int]) -> tuple[int, ...] | None:
    """One solution of ``a x = b``; ``None`` when the system is inconsistent.

    Free variables are set to zero.
    """
    if not isinstance(b, FqMatrix):
        b = column(b, a.field)
    _check_field(a, b)
    if b.cols != 1 or b.rows != a.rows:
        raise DimensionError(f"right-hand side {b.shape} does not match {a.shape}")
    if a.cols == 0:
        return () if not np.any(b.array) else None
    aug = np.hstack([a.array, b.array])
    red, pivots = kernels.rref(aug, a.q)
    if a.cols in pivots:
        return None
    x = [0] * a.cols
    for row, c in enumerate(pivots):
        x[c] = int(red[row, a.cols])
    return tuple(x)


def _check_index_set(idx: Sequence[int], bound: int, what: str) -> list[int]:
    idx = [int(i) for i in idx]
    for i in idx:
        if not 0 <= i < bound:
            raise IndexError(f"{what} index {i} out of range [0, {bound})")
    if len(set(idx)) != len(idx):
        raise IndexError(f"duplicate {what} index in {idx}")
    if any(x >= y for x, y in zip(idx, idx[1:])):
        raise IndexError(f"{what} indices must be strictly increasing: {idx}")
    return idx


def submatrix(a: FqMatrix, row_idx: Sequence[int], col_idx: Sequence[int]) -> FqMatrix:
    r = _check_index_set(row_idx, a.rows, "row")
    c = _check_index_set(col_idx, a.cols, "column")
    return FqMatrix._wrap(a.array[np.ix_(r, c)], a.field)


def columns(a: FqMatrix, col_idx: Sequence[int]) -> FqMatrix:
    """Select columns in the given order (repeats and any order allowed)."""
    return FqMatrix._wrap(a.array[:, list(col_idx)], a.field)
