"""Building coding matrices from a superregular source.

The source G'' (k x n) is split as::

    [ A'' | B'' | C'' ]   k - mu rows
    [ D   | E   | F   ]   mu rows

with column widths mu, k - mu, n - k.  The zeroing step clears A'' using
the bottom rows; the block-diagonal step turns the B-region into
diag(B''_1, ..., B''_g) by left-multiplying with T = [[B B'^-1, 0], [0, I_mu]].
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .gf import Field, FieldError, is_prime
from .linalg import FqMatrix, SingularMatrixError, invert, mat_mul, rank
from .superregular import cauchy, random_cauchy_spec

DESCRIPTOR_VERSION = 1


class ParameterError(ValueError):
    def __init__(self, problems: list[str]) -> None:
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class SchemeParams:
    q: int
    n: int
    k: int
    mu: int
    p: int

    @property
    def field(self) -> Field:
        return Field(self.q)

    @property
    def file_len(self) -> int:
        return self.k - self.mu

    @property
    def groups(self) -> int:
        return (self.k - self.mu) // self.p


def validate_params(params: SchemeParams) -> None:
    """Raise :class:`ParameterError` listing every violated constraint."""
    problems = []
    q, n, k, mu, p = params.q, params.n, params.k, params.mu, params.p
    for name in ("q", "n", "k", "mu", "p"):
        v = getattr(params, name)
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
            problems.append(f"{name} must be an integer, got {v!r}")
    if problems:
        raise ParameterError(problems)
    if not 2 <= q <= 2**31 - 1:
        problems.append(f"q={q} outside [2, 2^31-1]")
    elif not is_prime(q):
        problems.append(f"q={q} is not prime")
    if not 0 <= mu:
        problems.append(f"mu={mu} must be >= 0")
    if not mu < k:
        problems.append(f"mu={mu} must be < k={k}")
    if not k <= n:
        problems.append(f"k={k} must be <= n={n}")
    if not 1 <= p:
        problems.append(f"p={p} must be >= 1")
    if p > k - mu:
        problems.append(f"p={p} must be <= k-mu={k - mu}")
    if p >= 1 and k - mu >= 1 and (k - mu) % p != 0:
        problems.append(f"p={p} does not divide k-mu={k - mu}")
    if problems:
        raise ParameterError(problems)


@dataclass(frozen=True)
class BlockView:
    """Index ranges of the block decomposition for given parameters."""

    k: int
    n: int
    mu: int
    p: int

    @property
    def top(self) -> slice:
        return slice(0, self.k - self.mu)

    @property
    def bottom(self) -> slice:
        return slice(self.k - self.mu, self.k)

    @property
    def left(self) -> slice:
        return slice(0, self.mu)

    @property
    def middle(self) -> slice:
        return slice(self.mu, self.k)

    @property
    def right(self) -> slice:
        return slice(self.k, self.n)

    def region(self, name: str) -> tuple[slice, slice]:
        rows = self.top if name in "ABC" else self.bottom
        cols = {"A": self.left, "D": self.left, "B": self.middle,
                "E": self.middle, "C": self.right, "F": self.right}[name]
        return rows, cols

    def group_rows(self, i: int) -> slice:
        return slice(i * self.p, (i + 1) * self.p)

    def group_cols(self, i: int) -> slice:
        return slice(self.mu + i * self.p, self.mu + (i + 1) * self.p)

    def extract(self, m: FqMatrix, name: str, i: int | None = None) -> FqMatrix:
        """Block ``A``..``F``, or ``Bi`` / ``Ei`` for 0-based group ``i``."""
        a = m.array
        if name == "Bi":
            out = a[self.group_rows(i), self.group_cols(i)]
        elif name == "Ei":
            out = a[self.bottom, self.group_cols(i)]
        else:
            r, c = self.region(name)
            out = a[r, c]
        return FqMatrix._wrap(out, m.field)


@dataclass(frozen=True, eq=False)
class CodingScheme:
    """A validated coding matrix with its decode data.

    ``layout`` is ``"partial"`` for the zeroed, block-diagonal form (zero block,
    block-diagonal B-region) and ``"source"`` when the coding matrix is
    the superregular source itself (used when there is a single group).
    """

    params: SchemeParams
    G: FqMatrix
    layout: str
    decode_vectors: Mapping[tuple[int, int], tuple[int, ...]]
    T: FqMatrix | None = None
    source: FqMatrix | None = None
    seed: int | None = None
    extra: Mapping[str, Any] = field(default_factory=dict)

    @property
    def blocks(self) -> BlockView:
        p = self.params
        return BlockView(p.k, p.n, p.mu, p.p)

    def to_descriptor(self) -> dict[str, Any]:
        p = self.params
        d: dict[str, Any] = {"version": DESCRIPTOR_VERSION, "q": p.q, "n": p.n,
                             "k": p.k, "mu": p.mu, "p": p.p, "G": self.G.tolist()}
        if self.source is not None:
            d["source"] = self.source.tolist()
        if self.seed is not None:
            d["seed"] = int(self.seed)
        d.update(self.extra)
        return d

    def canonical_json(self) -> bytes:
        return canonical_json(self.to_descriptor())

    @property
    def digest(self) -> bytes:
        return hashlib.sha256(self.canonical_json()).digest()


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False).encode()


def _check_source(source: FqMatrix, params: SchemeParams) -> None:
    if source.shape != (params.k, params.n):
        raise ConstructionError(f"source is {source.shape}, expected {params.k}x{params.n}")
    if source.q != params.q:
        raise ConstructionError(f"source is over F_{source.q}, expected F_{params.q}")


def step2_zero_topleft(gpp: FqMatrix, params: SchemeParams) -> FqMatrix:
    """Clear A'': row_t += lambda_t * bottom, lambda_t = -A''_t D^-1."""
    _check_source(gpp, params)
    mu, k = params.mu, params.k
    if mu == 0:
        return gpp
    bv = BlockView(k, params.n, mu, params.p)
    d = bv.extract(gpp, "D")
    try:
        d_inv = invert(d)
    except SingularMatrixError as exc:
        raise ConstructionError(f"D block is singular (column {exc.pivot_col})") from exc
    a = bv.extract(gpp, "A")
    neg_a = FqMatrix._wrap((-a.array) % gpp.q, gpp.field)
    lam = mat_mul(neg_a, d_inv)
    bottom = FqMatrix._wrap(gpp.array[bv.bottom], gpp.field)
    top = (gpp.array[bv.top] + mat_mul(lam, bottom).array) % gpp.q
    return FqMatrix._wrap(np.vstack([top, gpp.array[bv.bottom]]), gpp.field)


def block_diagonal_target(gpp: FqMatrix, params: SchemeParams) -> FqMatrix:
    """B: keep the diagonal p x p blocks of B'', zero elsewhere."""
    bv = BlockView(params.k, params.n, params.mu, params.p)
    size = params.k - params.mu
    out = np.zeros((size, size), dtype=np.int64)
    for i in range(params.groups):
        s = slice(i * params.p, (i + 1) * params.p)
        out[s, s] = bv.extract(gpp, "Bi", i).array
    return FqMatrix._wrap(out, gpp.field)


def step3_blockdiag(gp: FqMatrix, gpp: FqMatrix, params: SchemeParams) -> tuple[FqMatrix, FqMatrix]:
    """Return ``(G, T)`` with G = T G'."""
    _check_source(gp, params)
    _check_source(gpp, params)
    bv = BlockView(params.k, params.n, params.mu, params.p)
    try:
        bp_inv = invert(bv.extract(gp, "B"))
    except SingularMatrixError as exc:
        raise ConstructionError(f"B' block is singular (column {exc.pivot_col})") from exc
    b = block_diagonal_target(gpp, params)
    t = np.eye(params.k, dtype=np.int64)
    t[bv.top, bv.top] = mat_mul(b, bp_inv).array
    T = FqMatrix._wrap(t, gp.field)
    return mat_mul(T, gp), T


def detect_layout(G: FqMatrix, params: SchemeParams) -> str:
    bv = BlockView(params.k, params.n, params.mu, params.p)
    a = G.array
    if np.any(a[bv.top, bv.left]):
        return "source"
    mid = a[bv.top, bv.middle].copy()
    for i in range(params.groups):
        s = slice(i * params.p, (i + 1) * params.p)
        mid[s, s] = 0
    return "source" if np.any(mid) else "partial"


def scheme_from_matrix(params: SchemeParams, G: FqMatrix, *, T: FqMatrix | None = None,
                       source: FqMatrix | None = None, seed: int | None = None,
                       extra: Mapping[str, Any] | None = None) -> CodingScheme:
    """Wrap a coding matrix, checking rank and precomputing decode vectors."""
    from .codec import compute_decode_vector  # codec depends on this module

    validate_params(params)
    _check_source(G, params)
    if rank(G) != params.k:
        raise ConstructionError("coding matrix does not have full rank k")
    layout = detect_layout(G, params)
    vectors = {}
    for r in range(params.groups):
        for i in range(1, params.p + 1):
            w = compute_decode_vector(G, params, layout, r, i)
            if w is None:
                raise ConstructionError(
                    f"group {r} symbol {i} is not recoverable from its access set")
            vectors[(r, i)] = w
    return CodingScheme(params, G, layout, vectors, T=T, source=source, seed=seed,
                        extra=dict(extra or {}))


def build_scheme(params: SchemeParams, source: FqMatrix | None = None, *,
                 seed: int | None = None, layout: str = "auto",
                 extra: Mapping[str, Any] | None = None) -> CodingScheme:
    """Zero and block-diagonalize ``source`` (or a seeded random Cauchy matrix).

    With ``layout="auto"`` a single-group scheme (p = k - mu, mu >= 1)
    uses the source directly: the block-diagonal form is then not
    weakly (k-1)-secure in general, while the superregular source is.
    ``layout="partial"`` forces the block-diagonal form.
    """
    validate_params(params)
    if layout not in ("auto", "partial", "source"):
        raise ValueError(f"unknown layout {layout!r}")
    f = Field(params.q)
    if source is None:
        if seed is None:
            raise ConstructionError("either a source matrix or a seed is required")
        if params.q < params.k + params.n:
            raise ConstructionError(f"auto-Cauchy needs q >= k+n = {params.k + params.n}")
        source = cauchy(random_cauchy_spec(f, params.k, params.n, random.Random(seed)))
    _check_source(source, params)

    if layout == "auto":
        layout = "source" if params.groups == 1 and params.mu >= 1 else "partial"
    if layout == "source":
        return scheme_from_matrix(params, source, source=source, seed=seed, extra=extra)

    gp = step2_zero_topleft(source, params)
    G, T = step3_blockdiag(gp, source, params)
    _verify_structure(G, source, params)
    for i in range(params.groups):
        try:
            invert(BlockView(params.k, params.n, params.mu, params.p).extract(source, "Bi", i))
        except SingularMatrixError as exc:
            raise ConstructionError(f"diagonal block {i + 1} of B'' is singular") from exc
    return scheme_from_matrix(params, G, T=T, source=source, seed=seed, extra=extra)


def _verify_structure(G: FqMatrix, source: FqMatrix, params: SchemeParams) -> None:
    bv = BlockView(params.k, params.n, params.mu, params.p)
    a = G.array
    if np.any(a[bv.top, bv.left]):
        raise ConstructionError("top-left block is not zero")
    if not np.array_equal(a[bv.top, bv.middle], block_diagonal_target(source, params).array):
        raise ConstructionError("B-region is not the block-diagonal target")
    if not np.array_equal(a[bv.bottom], source.array[bv.bottom]):
        raise ConstructionError("bottom rows changed")


# --- descriptor IO -------------------------------------------------------

def _matrix_from_json(value: Any, rows: int, cols: int, f: Field, what: str) -> FqMatrix:
    arr = np.array(value, dtype=object)
    if arr.ndim == 1 and arr.size == rows * cols:
        arr = arr.reshape(rows, cols)
    if arr.shape != (rows, cols):
        raise ParameterError([f"{what} has shape {arr.shape}, expected ({rows}, {cols})"])
    for v in arr.flat:
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < f.q:
            raise ParameterError([f"{what} entry {v!r} is not a residue mod {f.q}"])
    return FqMatrix(arr.astype(np.int64), f)


def scheme_from_descriptor(d: Mapping[str, Any]) -> CodingScheme:
    if d.get("version") != DESCRIPTOR_VERSION:
        raise ParameterError([f"unsupported descriptor version {d.get('version')!r}"])
    try:
        params = SchemeParams(d["q"], d["n"], d["k"], d["mu"], d["p"])
    except KeyError as exc:
        raise ParameterError([f"descriptor missing {exc.args[0]!r}"]) from None
    validate_params(params)
    f = Field(params.q)
    G = _matrix_from_json(d["G"], params.k, params.n, f, "G")
    source = None
    if "source" in d:
        source = _matrix_from_json(d["source"], params.k, params.n, f, "source")
    known = {"version", "q", "n", "k", "mu", "p", "G", "source", "seed"}
    extra = {key: v for key, v in d.items() if key not in known}
    return scheme_from_matrix(params, G, source=source, seed=d.get("seed"), extra=extra)


def load_scheme(path) -> CodingScheme:
    with open(path, "rb") as fh:
        try:
            d = json.loads(fh.read())
        except json.JSONDecodeError as exc:
            raise ParameterError([f"{path}: not valid JSON ({exc})"]) from None
    if not isinstance(d, dict):
        raise ParameterError([f"{path}: descriptor must be a JSON object"])
    return scheme_from_descriptor(d)


def load_matrix(path, field_: Field | int) -> FqMatrix:
    """Read a bare source matrix: a JSON list of rows, or an object with
    one of the keys ``matrix``, ``G``, ``source``."""
    f = field_ if isinstance(field_, Field) else Field(field_)
    with open(path, "rb") as fh:
        d = json.loads(fh.read())
    if isinstance(d, dict):
        for key in ("matrix", "source", "G"):
            if key in d:
                d = d[key]
                break
        else:
            raise ParameterError([f"{path}: no matrix found"])
    arr = np.array(d, dtype=object)
    if arr.ndim != 2:
        raise ParameterError([f"{path}: matrix must be a list of rows"])
    try:
        return FqMatrix(arr.astype(np.int64), f)
    except (TypeError, ValueError, FieldError) as exc:
        raise ParameterError([f"{path}: {exc}"]) from None
