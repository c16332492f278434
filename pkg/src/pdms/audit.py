"""Exhaustive property audit of coding schemes.

Weak security is decided by the linear-algebra test (is a unit vector
in the span of the observed columns?).  :func:`entropy_oracle` decides
the same question by enumerating every ``(s, r)`` and counting, with no
linear algebra at all; the two must agree.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Any, Iterable, Sequence

import numpy as np

from . import kernels
from .codec import access_set
from .construction import CodingScheme
from .linalg import FqMatrix, columns, rank

DEFAULT_SUBSETS = 10**6
DEFAULT_STATES = 10**7


class BudgetExceeded(RuntimeError):
    def __init__(self, what: str, needed: int, budget: int, partial: Any = None) -> None:
        self.what = what
        self.needed = needed
        self.budget = budget
        self.partial = partial
        super().__init__(f"{what}: {needed} exceeds budget {budget}")


@dataclass(frozen=True)
class Budgets:
    subsets: int = DEFAULT_SUBSETS
    states: int = DEFAULT_STATES

    @classmethod
    def from_env(cls, env: str | None = None) -> Budgets:
        """Parse ``PDMS_BUDGET``: ``"subsets=N,states=M"`` or one integer for both."""
        raw = os.environ.get("PDMS_BUDGET", "") if env is None else env
        raw = raw.strip()
        if not raw:
            return cls()
        if raw.isdigit():
            return cls(int(raw), int(raw))
        vals = {}
        for part in raw.split(","):
            key, _, val = part.partition("=")
            key = key.strip()
            if key not in ("subsets", "states") or not val.strip().isdigit():
                raise ValueError(f"bad PDMS_BUDGET entry {part!r}")
            vals[key] = int(val)
        return cls(**vals)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witness: Any = None

    def __bool__(self) -> bool:
        return self.ok


def unit_vector_in_span(m: FqMatrix, i: int, file_len: int | None = None) -> bool:
    """Whether e_i (1-based) lies in the column space of the k x m matrix."""
    limit = m.rows if file_len is None else file_len
    if not 1 <= i <= limit:
        raise IndexError(f"unit index {i} outside [1, {limit}]")
    e = np.zeros((m.rows, 1), dtype=np.int64)
    e[i - 1, 0] = 1
    return rank(m.hstack(FqMatrix._wrap(e, m.field))) == rank(m)


@dataclass(frozen=True)
class WeakLevel:
    level: int
    cols: tuple[int, ...] | None = None   # 0-based failing column set
    unit: int | None = None               # 1-based unit vector index


def weak_security_level(G: FqMatrix, file_len: int, cap: int,
                        budget: int = DEFAULT_SUBSETS) -> WeakLevel:
    """Largest ``m <= cap`` such that no ``m`` columns span any e_i, i <= file_len.

    Sizes are tried upward; the first failing size and its
    lexicographically smallest witness are returned.
    """
    n = G.cols
    cap = min(cap, n)
    a = G.array
    for m in range(1, cap + 1):
        if comb(n, m) > budget:
            raise BudgetExceeded(f"weak security subsets of size {m}", comb(n, m), budget,
                                 partial=WeakLevel(m - 1))
        for cols in combinations(range(n), m):
            hits = kernels.spanned_units(a[:, cols], G.q, file_len)
            if hits:
                return WeakLevel(m - 1, cols, hits[0] + 1)
    return WeakLevel(cap)


def strong_security_check(G: FqMatrix, mu: int) -> Verdict:
    """Every mu x mu minor of the bottom mu rows is invertible."""
    if mu == 0:
        return Verdict(True)
    bottom = G.array[G.rows - mu:]
    hit = kernels.first_singular_minor(bottom, G.q, mu)
    if hit is None:
        return Verdict(True)
    return Verdict(False, tuple(hit[1]))


def strong_secure_level(G: FqMatrix, mu: int, budget: int = DEFAULT_SUBSETS) -> int:
    """Largest ``m <= mu`` with every m-subset of columns fully masked.

    A set E is masked when the bottom mu rows restricted to E have the
    same rank as all of G restricted to E.
    """
    n = G.cols
    bottom = FqMatrix._wrap(G.array[G.rows - mu:], G.field)
    for m in range(1, mu + 1):
        if comb(n, m) > budget:
            raise BudgetExceeded(f"strong security subsets of size {m}", comb(n, m), budget,
                                 partial=m - 1)
        for cols in combinations(range(n), m):
            if rank(columns(bottom, cols)) != rank(columns(G, cols)):
                return m - 1
    return mu


def mds_check(G: FqMatrix, budget: int = DEFAULT_SUBSETS) -> Verdict:
    k, n = G.shape
    if comb(n, k) > budget:
        raise BudgetExceeded("MDS minors", comb(n, k), budget)
    for cols in combinations(range(n), k):
        if kernels.det(G.array[:, cols], G.q) == 0:
            return Verdict(False, cols)
    return Verdict(True)


def p_decodability_check(scheme: CodingScheme) -> Verdict:
    """Each cached vector w satisfies G[:, access(r)] w = e_{rp+i}."""
    p = scheme.params
    for r in range(p.groups):
        cols = [j - 1 for j in access_set(scheme, r)]
        sub = scheme.G.array[:, cols]
        for i in range(1, p.p + 1):
            w = scheme.decode_vectors.get((r, i))
            if w is None or len(w) != len(cols):
                return Verdict(False, (r, i))
            got = kernels.matmul(sub, np.array(w, dtype=np.int64).reshape(-1, 1), p.q)[:, 0]
            want = np.zeros(p.k, dtype=np.int64)
            want[r * p.p + i - 1] = 1
            if not np.array_equal(got, want):
                return Verdict(False, (r, i))
    return Verdict(True)


# --- brute-force entropy oracle ------------------------------------------

@dataclass
class LeakageProfile:
    """Exact counts of (observation, secret) pairs over all q^k states.

    ``tables[j]`` is indexed ``[observation, value]``: for per-symbol
    mode ``j`` is the 1-based file-symbol index and ``value`` ranges
    over F_q; joint mode uses key ``0`` and ``value`` indexes the whole
    file vector.
    """

    nodes: tuple[int, ...]
    mode: str
    total_states: int
    tables: dict[int, np.ndarray] = field(default_factory=dict)


@dataclass
class OracleResult:
    uniform: bool
    per_symbol: dict[int, bool]
    profile: LeakageProfile


def _rows_uniform(table: np.ndarray) -> bool:
    seen = table[table.sum(axis=1) > 0]
    return bool(np.all(seen == seen[:, :1]))


def entropy_oracle(scheme: CodingScheme, nodes: Iterable[int], mode: str = "joint",
                   budget: int = DEFAULT_STATES, chunk: int = 1 << 18) -> OracleResult:
    """Count, over every (s, r), how the secret is distributed given c_E.

    Joint mode: uniform conditional distribution of the whole file for
    every observed value (strong security of E).  Per-symbol mode: the
    same for each symbol separately (weak security of E).
    """
    if mode not in ("joint", "per-symbol"):
        raise ValueError(f"unknown mode {mode!r}")
    p = scheme.params
    q, k, m = p.q, p.k, p.file_len
    nodes = tuple(sorted(set(int(i) for i in nodes)))
    total = q**k
    if total > budget:
        raise BudgetExceeded("entropy oracle states", total, budget)
    cols = [i - 1 for i in nodes]
    g = scheme.G.array[:, cols]
    n_obs = q ** len(cols)
    width = q**m if mode == "joint" else q
    if n_obs * width > 4 * budget:
        raise BudgetExceeded("entropy oracle table", n_obs * width, 4 * budget)
    keys = [0] if mode == "joint" else list(range(1, m + 1))
    tables = {j: np.zeros(n_obs * width, dtype=np.int64) for j in keys}
    pow_q = [q**t for t in range(max(k, len(cols)) + 1)]
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = [(idx // pow_q[t]) % q for t in range(k)]   # digits[t] = x_t
        obs_index = np.zeros_like(idx)
        for e in range(len(cols)):
            acc = np.zeros_like(idx)
            for t in range(k):
                acc = (acc + digits[t] * int(g[t, e])) % q
            obs_index += acc * pow_q[e]
        if mode == "joint":
            key = obs_index * width + idx % pow_q[m]
            tables[0] += np.bincount(key, minlength=n_obs * width)
        else:
            for j in keys:
                key = obs_index * q + digits[j - 1]
                tables[j] += np.bincount(key, minlength=n_obs * width)
    shaped = {j: t.reshape(n_obs, width) for j, t in tables.items()}
    verdicts = {j: _rows_uniform(t) for j, t in shaped.items()}
    profile = LeakageProfile(nodes, mode, total, shaped)
    return OracleResult(all(verdicts.values()), verdicts if mode == "per-symbol" else {}, profile)


def cross_validate(scheme: CodingScheme, max_size: int,
                   budget: int = DEFAULT_STATES) -> list[tuple[tuple[int, ...], int]]:
    """(nodes, j) pairs where the oracle and the span test disagree."""
    p = scheme.params
    bad = []
    for size in range(0, max_size + 1):
        for nodes in combinations(range(1, p.n + 1), size):
            res = entropy_oracle(scheme, nodes, "per-symbol", budget)
            sub = columns(scheme.G, [i - 1 for i in nodes])
            for j in range(1, p.file_len + 1):
                span = bool(nodes) and unit_vector_in_span(sub, j, p.file_len)
                if res.per_symbol[j] == span:
                    bad.append((nodes, j))
    return bad


# --- report ------------------------------------------------------------

@dataclass
class AuditReport:
    q: int
    n: int
    k: int
    mu: int
    p: int
    mds: bool | None
    strong_secure: bool
    strong_secure_at: int | None
    p_decodable: bool
    weak_security_level: int | None
    perfect: bool | None
    witnesses: dict[str, Any] = field(default_factory=dict)
    bounds_hit: list[str] = field(default_factory=list)
    entropy: dict[str, Any] | None = None

    @property
    def mandatory_ok(self) -> bool:
        return bool(self.mds) and self.strong_secure and self.p_decodable

    @property
    def mandatory_truncated(self) -> bool:
        return any(b in ("mds", "strong") for b in self.bounds_hit)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "params": {"q": self.q, "n": self.n, "k": self.k, "mu": self.mu, "p": self.p},
            "mds": self.mds,
            "strong_secure": self.strong_secure,
            "strong_secure_at": self.strong_secure_at,
            "p_decodable": self.p_decodable,
            "weak_security_level": self.weak_security_level,
            "perfect": self.perfect,
            "witnesses": self.witnesses,
            "bounds_hit": list(self.bounds_hit),
        }
        if self.entropy is not None:
            out["entropy"] = self.entropy
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _one_based(cols: Sequence[int]) -> list[int]:
    return [int(c) + 1 for c in cols]


def classify(scheme: CodingScheme, budgets: Budgets | None = None,
             entropy: bool = False) -> AuditReport:
    """Run every check and assemble the report.

    ``perfect`` requires MDS, strong mu-security, p-decodability and weak
    (mu+p-1)-security; it is ``None`` when a budget left it undecided.
    """
    budgets = budgets or Budgets()
    prm = scheme.params
    G = scheme.G
    wit: dict[str, Any] = {}
    bounds: list[str] = []

    try:
        v = mds_check(G, budgets.subsets)
        mds = v.ok
        if not v.ok:
            wit["mds"] = _one_based(v.witness)
    except BudgetExceeded:
        mds = None
        bounds.append("mds")

    sv = strong_security_check(G, prm.mu)
    if not sv.ok:
        wit["strong"] = _one_based(sv.witness)
    try:
        strong_at = strong_secure_level(G, prm.mu, budgets.subsets)
    except BudgetExceeded as exc:
        strong_at = None
        bounds.append("strong")
        wit["strong_verified_up_to"] = exc.partial

    pv = p_decodability_check(scheme)
    if not pv.ok:
        wit["p_decodable"] = {"group": pv.witness[0], "offset": pv.witness[1]}

    threshold = prm.mu + prm.p - 1
    try:
        wl = weak_security_level(G, prm.file_len, prm.mu + prm.p, budgets.subsets)
        weak = wl.level
        if wl.cols is not None:
            wit["weak"] = {"nodes": _one_based(wl.cols), "unit": wl.unit}
        weak_decided = True
    except BudgetExceeded as exc:
        weak = exc.partial.level
        bounds.append("weak")
        weak_decided = weak >= threshold

    if mds is None or not weak_decided:
        perfect = None if (mds is not False and sv.ok and pv.ok) else False
    else:
        perfect = bool(mds and sv.ok and pv.ok and weak >= threshold)

    report = AuditReport(prm.q, prm.n, prm.k, prm.mu, prm.p, mds, sv.ok, strong_at, pv.ok,
                         weak, perfect, wit, bounds)
    if entropy:
        report.entropy = entropy_audit(scheme, budgets)
        if report.entropy.get("truncated"):
            bounds.append("entropy")
    return report


def entropy_audit(scheme: CodingScheme, budgets: Budgets) -> dict[str, Any]:
    """Joint oracle on every |E| <= mu, per-symbol on every |E| <= mu+p-1,
    each per-symbol verdict compared with the span test."""
    p = scheme.params
    out: dict[str, Any] = {"joint_uniform": True, "per_symbol_checked": 0,
                           "discrepancies": [], "truncated": False}
    try:
        for size in range(0, p.mu + 1):
            for nodes in combinations(range(1, p.n + 1), size):
                if not entropy_oracle(scheme, nodes, "joint", budgets.states).uniform:
                    out["joint_uniform"] = False
                    out.setdefault("joint_leak", list(nodes))
        bad = cross_validate(scheme, p.mu + p.p - 1, budgets.states)
        out["per_symbol_checked"] = sum(comb(p.n, s) for s in range(p.mu + p.p))
        out["discrepancies"] = [{"nodes": list(nd), "symbol": j} for nd, j in bad]
    except BudgetExceeded as exc:
        out["truncated"] = True
        out["reason"] = str(exc)
    return out
