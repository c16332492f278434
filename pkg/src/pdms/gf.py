"""Prime-field arithmetic with a runtime modulus.

Matrices and codecs work on plain ``int`` residues for speed; the
:class:`FieldElement` wrapper exists for callers that want modulus
checking on every operation.
"""

from __future__ import annotations

import functools
import os
import random
from dataclasses import dataclass
from typing import Protocol

import numpy as np

MAX_MODULUS = 2**31 - 1

# Deterministic Miller-Rabin witnesses, valid for all n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class FieldError(ValueError):
    """Raised on invalid moduli, mismatched fields or inverting zero."""


@functools.lru_cache(maxsize=256)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def inv_mod(a: int, q: int) -> int:
    """Inverse of ``a`` modulo ``q`` by the extended Euclidean algorithm."""
    a %= q
    if a == 0:
        raise FieldError("inversion of zero")
    r0, r1 = q, a
    t0, t1 = 0, 1
    while r1:
        quot = r0 // r1
        r0, r1 = r1, r0 - quot * r1
        t0, t1 = t1, t0 - quot * t1
    return t0 % q


@dataclass(frozen=True)
class Field:
    """The prime field F_q."""

    q: int

    def __post_init__(self) -> None:
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool):
            raise FieldError(f"modulus must be an integer, got {self.q!r}")
        object.__setattr__(self, "q", int(self.q))
        if not 2 <= self.q <= MAX_MODULUS:
            raise FieldError(f"modulus {self.q} outside [2, 2^31-1]")
        if not is_prime(self.q):
            raise FieldError(f"modulus {self.q} is not prime")

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(int(value) % self.q, self)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return a * b % self.q

    def neg(self, a: int) -> int:
        return -a % self.q

    def inv(self, a: int) -> int:
        return inv_mod(a, self.q)

    @property
    def symbol_bytes(self) -> int:
        """Minimal number of octets whose range covers ``q`` values."""
        return max(1, ((self.q - 1).bit_length() + 7) // 8)


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: Field

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.field.q:
            raise FieldError(f"{self.value} is not a canonical residue mod {self.field.q}")

    def _other(self, other: FieldElement | int) -> int:
        if isinstance(other, FieldElement):
            if other.field.q != self.field.q:
                raise FieldError(f"modulus mismatch: {self.field.q} vs {other.field.q}")
            return other.value
        return int(other)

    def __add__(self, other):
        return fq_add(self, other if isinstance(other, FieldElement) else self.field(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-(other if isinstance(other, FieldElement) else self.field(other)))

    def __mul__(self, other):
        return fq_mul(self, other if isinstance(other, FieldElement) else self.field(other))

    __rmul__ = __mul__

    def __neg__(self):
        return fq_neg(self)

    def __truediv__(self, other):
        other = other if isinstance(other, FieldElement) else self.field(other)
        return fq_mul(self, fq_inv(other))

    def __int__(self) -> int:
        return self.value

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.field.q == other.field.q and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.field.q
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.field.q))

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.q})"


def _same_field(a: FieldElement, b: FieldElement) -> Field:
    if a.field.q != b.field.q:
        raise FieldError(f"modulus mismatch: {a.field.q} vs {b.field.q}")
    return a.field


def fq_add(a: FieldElement, b: FieldElement) -> FieldElement:
    f = _same_field(a, b)
    return FieldElement(f.add(a.value, b.value), f)


def fq_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    f = _same_field(a, b)
    return FieldElement(f.mul(a.value, b.value), f)


def fq_inv(a: FieldElement) -> FieldElement:
    return FieldElement(inv_mod(a.value, a.field.q), a.field)


def fq_neg(a: FieldElement) -> FieldElement:
    return FieldElement(a.field.neg(a.value), a.field)


class RandomSource(Protocol):
    """Anything yielding uniformly distributed octets."""

    def read(self, n: int) -> bytes: ...


class SeededSource:
    """Reproducible octet stream from a 64-bit seed.

    Bytes are served from fixed-size blocks, so the stream does not depend
    on how reads are chunked.
    """

    _BLOCK = 4096

    def __init__(self, seed: int) -> None:
        self.seed = int(seed) & (2**64 - 1)
        self._rng = random.Random(self.seed)
        self._buf = b""

    def read(self, n: int) -> bytes:
        while len(self._buf) < n:
            self._buf += self._rng.randbytes(self._BLOCK)
        out, self._buf = self._buf[:n], self._buf[n:]
        return out


class OsSource:
    """Octets from the operating system's entropy pool."""

    def read(self, n: int) -> bytes:
        return os.urandom(n)


def uniform_element(field: Field, source: RandomSource) -> FieldElement:
    """Draw one element uniformly over F_q by rejection sampling."""
    nb = field.symbol_bytes
    span = 256**nb
    limit = span - span % field.q
    while True:
        v = int.from_bytes(source.read(nb), "big")
        if v < limit:
            return FieldElement(v % field.q, field)


def uniform_elements(field: Field, source: RandomSource, count: int) -> np.ndarray:
    """Draw ``count`` uniform elements.

    Consumes the source exactly as ``count`` successive calls to
    :func:`uniform_element` would.
    """
    nb = field.symbol_bytes
    span = 256**nb
    limit = span - span % field.q
    out = np.empty(count, dtype=np.int64)
    filled = 0
    while filled < count:
        need = count - filled
        raw = np.frombuffer(source.read(need * nb), dtype=np.uint8).reshape(need, nb)
        words = np.zeros(need, dtype=np.int64)
        for col in range(nb):
            words = (words << 8) | raw[:, col]
        ok = words[words < limit]
        out[filled:filled + ok.size] = ok % field.q
        filled += ok.size
    return out
