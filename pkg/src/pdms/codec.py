"""Encoding and decoding of stripes, files and share files.

A stripe is ``x = (s | r)`` with ``k - mu`` file symbols and ``mu``
uniform random symbols; node ``i`` stores coordinate ``i`` of ``x G``.
Node indices are 1-based throughout this module.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import kernels
from .construction import BlockView, CodingScheme, SchemeParams
from .gf import Field, RandomSource, uniform_elements
from .linalg import FqMatrix, SingularMatrixError, invert, solve

MAGIC = b"PDMS"
SHARE_VERSION = 1
_HEADER = struct.Struct(">4sBIHHHHHQQ32s")
HEADER_SIZE = _HEADER.size


class CodecError(ValueError):
    pass


class InsufficientSharesError(CodecError):
    pass


class ShareMismatchError(CodecError):
    """Shares do not belong to the same scheme or file."""


class AccessSetError(CodecError):
    pass


class CorruptShareError(CodecError):
    pass


class Stripe(NamedTuple):
    s: tuple[int, ...]
    r: tuple[int, ...]


def _check_symbols(values: Iterable[int], q: int, what: str) -> list[int]:
    out = []
    for v in values:
        v = int(v)
        if not 0 <= v < q:
            raise CodecError(f"{what} symbol {v} out of range [0, {q})")
        out.append(v)
    return out


def encode_stripe(scheme: CodingScheme, s: Sequence[int], rng: RandomSource | None = None,
                  r: Sequence[int] | None = None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Return ``(c, r)``; ``r`` is drawn from ``rng`` unless given."""
    p = scheme.params
    s = _check_symbols(s, p.q, "file")
    if len(s) != p.file_len:
        raise CodecError(f"expected {p.file_len} file symbols, got {len(s)}")
    if r is None:
        if p.mu and rng is None:
            raise CodecError("a random source is required when mu > 0")
        r = uniform_elements(Field(p.q), rng, p.mu).tolist() if p.mu else []
    r = _check_symbols(r, p.q, "random")
    if len(r) != p.mu:
        raise CodecError(f"expected {p.mu} random symbols, got {len(r)}")
    x = np.array([s + r], dtype=np.int64)
    c = kernels.matmul(x, scheme.G.array, p.q)[0]
    return tuple(int(v) for v in c), tuple(r)


def _pick_nodes(params: SchemeParams, nodes: Iterable[int]) -> list[int]:
    nodes = [int(i) for i in nodes]
    if len(set(nodes)) != len(nodes):
        raise CodecError(f"duplicate node indices in {sorted(nodes)}")
    for i in nodes:
        if not 1 <= i <= params.n:
            raise CodecError(f"node index {i} outside [1, {params.n}]")
    if len(nodes) < params.k:
        raise InsufficientSharesError(f"need {params.k} shares, got {len(nodes)}")
    return sorted(nodes)[:params.k]


def _decoding_matrix(scheme: CodingScheme, nodes: Sequence[int]) -> np.ndarray:
    cols = [i - 1 for i in nodes]
    try:
        return invert(FqMatrix._wrap(scheme.G.array[:, cols], scheme.G.field)).array
    except SingularMatrixError:
        raise CodecError(f"columns {list(nodes)} of G are singular: scheme is not MDS") from None


def decode_full(scheme: CodingScheme, observed: Mapping[int, int]) -> Stripe:
    """Recover ``(s | r)`` from ``k`` observed coordinates.

    Extra observations beyond ``k`` are ignored (lowest indices are used).
    """
    p = scheme.params
    nodes = _pick_nodes(p, observed.keys())
    c = np.array([_check_symbols([observed[i] for i in nodes], p.q, "coded")], dtype=np.int64)
    x = kernels.matmul(c, _decoding_matrix(scheme, nodes), p.q)[0]
    return Stripe(tuple(int(v) for v in x[:p.file_len]), tuple(int(v) for v in x[p.file_len:]))


def access_set(scheme_or_params: CodingScheme | SchemeParams, r: int) -> tuple[int, ...]:
    p = getattr(scheme_or_params, "params", scheme_or_params)
    if not 0 <= r < p.groups:
        raise AccessSetError(f"group {r} outside [0, {p.groups})")
    return tuple(range(1, p.mu + 1)) + tuple(range(p.mu + r * p.p + 1, p.mu + (r + 1) * p.p + 1))


def compute_decode_vector(G: FqMatrix, params: SchemeParams, layout: str,
                          r: int, i: int) -> tuple[int, ...] | None:
    """Vector ``w`` with ``G[:, access] w = e_{rp+i}`` (``i`` is 1-based).

    For the partial layout ``w = (u | v)`` where ``v`` is column ``i`` of
    the inverse of the group's diagonal block and ``D u = -E_r v``.
    """
    q = params.q
    bv = BlockView(params.k, params.n, params.mu, params.p)
    if layout == "partial":
        try:
            b_inv = invert(bv.extract(G, "Bi", r))
        except SingularMatrixError:
            return None
        v = b_inv.array[:, i - 1]
        if params.mu == 0:
            return tuple(int(x) for x in v)
        rhs = (-kernels.matmul(bv.extract(G, "Ei", r).array, v.reshape(-1, 1), q)) % q
        u = solve(bv.extract(G, "D"), FqMatrix._wrap(rhs, G.field))
        if u is None:
            return None
        return tuple(u) + tuple(int(x) for x in v)
    cols = [j - 1 for j in access_set(params, r)]
    target = [0] * params.k
    target[r * params.p + i - 1] = 1
    return solve(FqMatrix._wrap(G.array[:, cols], G.field), target)


def partial_decode_vector(scheme: CodingScheme, r: int, i: int) -> tuple[int, ...]:
    p = scheme.params
    if not 0 <= r < p.groups:
        raise AccessSetError(f"group {r} outside [0, {p.groups})")
    if not 1 <= i <= p.p:
        raise AccessSetError(f"offset {i} outside [1, {p.p}]")
    return scheme.decode_vectors[(r, i)]


def _group_matrix(scheme: CodingScheme, r: int) -> np.ndarray:
    p = scheme.params
    return np.array([partial_decode_vector(scheme, r, i) for i in range(1, p.p + 1)],
                    dtype=np.int64).T


def decode_group(scheme: CodingScheme, r: int, observed: Mapping[int, int]) -> tuple[int, ...]:
    """File symbols ``s_{rp+1} .. s_{(r+1)p}`` from the group's access set."""
    nodes = access_set(scheme, r)
    if set(observed) != set(nodes):
        raise AccessSetError(
            f"group {r} needs exactly nodes {list(nodes)}, got {sorted(observed)}")
    obs = np.array([_check_symbols([observed[j] for j in nodes], scheme.params.q, "coded")],
                   dtype=np.int64)
    out = kernels.matmul(obs, _group_matrix(scheme, r), scheme.params.q)[0]
    return tuple(int(v) for v in out)


# --- shares and files ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Share:
    q: int
    n: int
    k: int
    mu: int
    p: int
    node_index: int
    stripe_count: int
    original_length: int
    scheme_digest: bytes
    payload: np.ndarray

    def header_key(self) -> tuple:
        return (self.q, self.n, self.k, self.mu, self.p, self.stripe_count,
                self.original_length, self.scheme_digest)

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, SHARE_VERSION, self.q, self.n, self.k, self.mu, self.p,
                            self.node_index, self.stripe_count, self.original_length,
                            self.scheme_digest)
        return head + np.asarray(self.payload, dtype=">u2").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> Share:
        if len(blob) < HEADER_SIZE:
            raise CorruptShareError("share is shorter than its header")
        (magic, version, q, n, k, mu, p, node, stripes, length,
         digest) = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise CorruptShareError(f"bad magic {magic!r}")
        if version != SHARE_VERSION:
            raise CorruptShareError(f"unsupported share version {version}")
        body = blob[HEADER_SIZE:]
        if len(body) != 2 * stripes:
            raise CorruptShareError(f"payload has {len(body)} bytes, header says {stripes} symbols")
        payload = np.frombuffer(body, dtype=">u2").astype(np.int64)
        if payload.size and int(payload.max()) >= q:
            raise CorruptShareError(f"symbol {int(payload.max())} >= q={q}")
        return cls(q, n, k, mu, p, node, stripes, length, digest, payload)


def _byte_mode_check(q: int) -> None:
    if q < 257:
        raise CodecError(f"byte mode needs q >= 257, got {q}")
    if q > 65536:
        raise CodecError(f"share symbols are 16-bit; q={q} is too large")


def encode_file(scheme: CodingScheme, data: bytes, rng: RandomSource) -> list[Share]:
    """One share per node; each stripe gets fresh randomness, in stripe order."""
    p = scheme.params
    _byte_mode_check(p.q)
    m = p.file_len
    stripes = -(-len(data) // m)
    s = np.zeros(stripes * m, dtype=np.int64)
    s[:len(data)] = np.frombuffer(data, dtype=np.uint8)
    s = s.reshape(stripes, m)
    r = uniform_elements(Field(p.q), rng, stripes * p.mu).reshape(stripes, p.mu)
    c = kernels.matmul(np.hstack([s, r]), scheme.G.array, p.q)
    digest = scheme.digest
    return [Share(p.q, p.n, p.k, p.mu, p.p, j + 1, stripes, len(data), digest,
                  np.ascontiguousarray(c[:, j]))
            for j in range(p.n)]


def _check_shares(scheme: CodingScheme, shares: Sequence[Share]) -> None:
    if not shares:
        raise InsufficientSharesError("no shares given")
    p = scheme.params
    first = shares[0]
    for sh in shares:
        if sh.scheme_digest != scheme.digest:
            raise ShareMismatchError(f"share {sh.node_index} belongs to a different scheme")
        if sh.header_key() != first.header_key():
            raise ShareMismatchError(f"share {sh.node_index} header disagrees with share {first.node_index}")
        if (sh.q, sh.n, sh.k, sh.mu, sh.p) != (p.q, p.n, p.k, p.mu, p.p):
            raise ShareMismatchError("share parameters disagree with the scheme")
        if sh.payload.size != sh.stripe_count:
            raise CorruptShareError(f"share {sh.node_index} payload length mismatch")
        if sh.payload.size and int(sh.payload.max()) >= p.q:
            raise CorruptShareError(f"share {sh.node_index} holds a symbol >= q")


def decode_file(scheme: CodingScheme, shares: Sequence[Share]) -> bytes:
    _check_shares(scheme, shares)
    p = scheme.params
    by_node = {}
    for sh in shares:
        if sh.node_index in by_node:
            raise CodecError(f"duplicate share for node {sh.node_index}")
        by_node[sh.node_index] = sh
    nodes = _pick_nodes(p, by_node)
    first = shares[0]
    if first.stripe_count == 0:
        return b""
    c = np.stack([by_node[i].payload for i in nodes], axis=1)
    x = kernels.matmul(c, _decoding_matrix(scheme, nodes), p.q)
    s = x[:, :p.file_len].reshape(-1)[:first.original_length]
    if s.size and int(s.max()) > 255:
        raise CorruptShareError("decoded symbol is not a byte: shares are corrupt")
    return s.astype(np.uint8).tobytes()


@dataclass(frozen=True)
class GroupChunk:
    """Bytes of one group, taken from every stripe.

    Byte ``t`` of stripe ``j`` sits at file offset
    ``j * stride + offset + t``; ``positions`` lists them all.
    """

    group: int
    nodes: tuple[int, ...]
    offset: int
    width: int
    stride: int
    original_length: int
    data: bytes

    @property
    def positions(self) -> list[int]:
        stripes = -(-self.original_length // self.stride) if self.stride else 0
        return [j * self.stride + self.offset + t for j in range(stripes) for t in range(self.width)
                if j * self.stride + self.offset + t < self.original_length]

    def sidecar(self) -> dict:
        return {"group": self.group, "nodes": list(self.nodes), "offset": self.offset,
                "width": self.width, "stride": self.stride,
                "original_length": self.original_length, "byte_count": len(self.data)}


def decode_group_file(scheme: CodingScheme, r: int, shares: Sequence[Share]) -> GroupChunk:
    _check_shares(scheme, shares)
    p = scheme.params
    nodes = access_set(scheme, r)
    got = sorted(sh.node_index for sh in shares)
    if got != sorted(nodes):
        raise AccessSetError(f"group {r} needs exactly nodes {list(nodes)}, got {got}")
    by_node = {sh.node_index: sh for sh in shares}
    first = shares[0]
    m = p.file_len
    if first.stripe_count:
        obs = np.stack([by_node[i].payload for i in nodes], axis=1)
        sym = kernels.matmul(obs, _group_matrix(scheme, r), p.q)
    else:
        sym = np.zeros((0, p.p), dtype=np.int64)
    pos = (np.arange(sym.shape[0])[:, None] * m + r * p.p + np.arange(p.p)[None, :]).reshape(-1)
    keep = sym.reshape(-1)[pos < first.original_length]
    if keep.size and int(keep.max()) > 255:
        raise CorruptShareError("decoded symbol is not a byte: shares are corrupt")
    return GroupChunk(r, nodes, r * p.p, p.p, m, first.original_length,
                      keep.astype(np.uint8).tobytes())
