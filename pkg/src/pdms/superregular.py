"""Cauchy matrices, superregularity checks and the randomized search for
(p, mu)-superregular sources."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .gf import Field, inv_mod
from .linalg import FqMatrix

# Exhaustive minor enumeration guard.
MAX_SIDE = 10
MAX_PERIMETER = 24


class GuardExceeded(RuntimeError):
    pass


class SearchExhausted(RuntimeError):
    def __init__(self, attempts: int, q: int) -> None:
        self.attempts = attempts
        self.q = q
        super().__init__(
            f"no (p,mu)-superregular matrix found in {attempts} attempts over F_{q}; "
            "try a larger field"
        )


@dataclass(frozen=True)
class CauchySpec:
    x: tuple[int, ...]
    y: tuple[int, ...]
    field: Field

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(int(v) % self.field.q for v in self.x))
        object.__setattr__(self, "y", tuple(int(v) % self.field.q for v in self.y))
        pts = self.x + self.y
        if len(set(pts)) != len(pts):
            raise ValueError("Cauchy evaluation points must be pairwise distinct")


@dataclass(frozen=True)
class SearchBudget:
    max_attempts: int
    seed: int

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


@dataclass(frozen=True)
class CounterexampleMinor:
    """A singular minor: 0-based row and column index sets.

    ``group`` and ``deleted`` are set for failures of the block condition:
    the 0-based group and the (row, column) deleted from its H matrix.
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    group: int | None = None
    deleted: tuple[int, int] | None = None


def cauchy(spec: CauchySpec) -> FqMatrix:
    q = spec.field.q
    data = [[inv_mod(xi - yj, q) for yj in spec.y] for xi in spec.x]
    return FqMatrix(np.array(data, dtype=np.int64).reshape(len(spec.x), len(spec.y)), spec.field)


def random_cauchy_spec(field: Field, k: int, n: int, rng: random.Random) -> CauchySpec:
    if field.q < k + n:
        raise ValueError(f"Cauchy {k}x{n} needs q >= {k + n}, got {field.q}")
    pts = rng.sample(range(field.q), k + n)
    return CauchySpec(tuple(pts[:k]), tuple(pts[k:]), field)


def _guard(rows: int, cols: int, override: bool) -> None:
    if override:
        return
    if min(rows, cols) > MAX_SIDE or rows + cols > MAX_PERIMETER:
        raise GuardExceeded(
            f"exhaustive minor check of a {rows}x{cols} matrix exceeds the guard "
            f"(min side <= {MAX_SIDE}, rows+cols <= {MAX_PERIMETER})"
        )


def find_singular_minor(a: FqMatrix, override_guard: bool = False) -> CounterexampleMinor | None:
    """Smallest-order singular square submatrix, or ``None``."""
    _guard(a.rows, a.cols, override_guard)
    for order in range(1, min(a.rows, a.cols) + 1):
        hit = kernels.first_singular_minor(a.array, a.q, order)
        if hit is not None:
            return CounterexampleMinor(tuple(hit[0]), tuple(hit[1]))
    return None


def is_superregular(a: FqMatrix, override_guard: bool = False) -> bool:
    return find_singular_minor(a, override_guard) is None


def block_h(gpp: FqMatrix, k: int, mu: int, p: int, group: int) -> FqMatrix:
    """The (mu+p) x (mu+p) matrix [[0, B''_i], [D, E_i]] for a 0-based group."""
    a = gpp.array
    top = np.hstack([np.zeros((p, mu), dtype=np.int64),
                     a[group * p:(group + 1) * p, mu + group * p:mu + (group + 1) * p]])
    bottom = np.hstack([a[k - mu:k, :mu], a[k - mu:k, mu + group * p:mu + (group + 1) * p]])
    return FqMatrix._wrap(np.vstack([top, bottom]), gpp.field)


def find_block_violation(gpp: FqMatrix, k: int, mu: int, p: int) -> CounterexampleMinor | None:
    """Check only the deleted-row/deleted-column condition on every H_i."""
    if mu == 0 or p == 1:
        return None
    q = gpp.q
    for g in range((k - mu) // p):
        h = block_h(gpp, k, mu, p, g).array
        for drow in range(p):
            keep_r = [i for i in range(mu + p) if i != drow]
            for dcol in range(mu):
                keep_c = [j for j in range(mu + p) if j != dcol]
                if kernels.det(h[np.ix_(keep_r, keep_c)], q) == 0:
                    # map back to G'' coordinates
                    rows = tuple(g * p + i if i < p else k - mu + (i - p) for i in keep_r)
                    cols = tuple(j if j < mu else mu + g * p + (j - mu) for j in keep_c)
                    return CounterexampleMinor(rows, cols, group=g, deleted=(drow, dcol))
    return None


def _check_params(params) -> None:
    from .construction import validate_params  # construction imports this module

    validate_params(params)


def _check_shape(gpp: FqMatrix, params) -> None:
    _check_params(params)
    if gpp.shape != (params.k, params.n) or gpp.q != params.q:
        raise ValueError(
            f"matrix is {gpp.shape} over F_{gpp.q}, parameters want "
            f"{params.k}x{params.n} over F_{params.q}"
        )


def find_pmu_violation(gpp: FqMatrix, params, override_guard: bool = False,
                       assume_superregular: bool = False) -> CounterexampleMinor | None:
    _check_shape(gpp, params)
    if not assume_superregular:
        bad = find_singular_minor(gpp, override_guard)
        if bad is not None:
            return bad
    return find_block_violation(gpp, params.k, params.mu, params.p)


def is_pmu_superregular(gpp: FqMatrix, params, override_guard: bool = False) -> bool:
    return find_pmu_violation(gpp, params, override_guard) is None


@dataclass(frozen=True)
class SearchResult:
    matrix: FqMatrix
    attempts: int
    method: str  # "cauchy" or "random"
    cauchy: CauchySpec | None = None


def search_pmu_superregular(params, budget: SearchBudget, override_guard: bool = False) -> SearchResult:
    """Randomized search for a verified (p, mu)-superregular k x n matrix.

    Cauchy candidates come first when the field has k+n distinct points;
    they are superregular by construction so only the block condition is
    tested.  Otherwise fully random matrices are checked in full.
    """
    _check_params(params)
    field = Field(params.q)
    k, n = params.k, params.n
    rng = random.Random(budget.seed)
    use_cauchy = field.q >= k + n
    if not use_cauchy:
        _guard(k, n, override_guard)
    for attempt in range(1, budget.max_attempts + 1):
        if use_cauchy:
            spec = random_cauchy_spec(field, k, n, rng)
            cand = cauchy(spec)
            if find_block_violation(cand, k, params.mu, params.p) is None:
                return SearchResult(cand, attempt, "cauchy", spec)
        else:
            data = [[rng.randrange(1, field.q) for _ in range(n)] for _ in range(k)]
            cand = FqMatrix(data, field)
            if find_pmu_violation(cand, params, override_guard=True) is None:
                return SearchResult(cand, attempt, "random")
    raise SearchExhausted(budget.max_attempts, field.q)


def combination_weight(a: FqMatrix, coeffs: Sequence[int], row_idx: Sequence[int]) -> int:
    """Hamming weight of the combination of the chosen rows."""
    vec = np.zeros(a.cols, dtype=np.int64)
    for c, r in zip(coeffs, row_idx):
        vec = (vec + int(c) * a.array[r]) % a.q
    return int(np.count_nonzero(vec))
