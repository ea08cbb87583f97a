"""Doubly stochastic transfer matrices and their Birkhoff-von Neumann decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DecompositionStalled, DimensionMismatch, NotMajorized
from .spectra import Spectrum, first_violation

ENTRY_TOL = 1e-12
SUM_TOL = 1e-10
ZERO_TOL = 1e-12
TRANSFER_TOL = 1e-10
# leftover mass tolerated when no perfect matching remains
STALL_TOL = 1e-10
# coordinates closer than this count as already matched in the T-transform chain
_ULP_TOL = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class DoublyStochastic:
    entries: np.ndarray
    # T-transforms (j, k, lam) in application order, when built by transfer_matrix
    chain: tuple = field(default=(), compare=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch("doubly stochastic matrix must be square")
        if m.size and m.min() < -ENTRY_TOL:
            raise ValueError(f"negative entry {m.min()!r}")
        if np.max(np.abs(m.sum(axis=0) - 1)) > SUM_TOL or np.max(np.abs(m.sum(axis=1) - 1)) > SUM_TOL:
            raise ValueError("row and column sums must equal 1")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, vec):
        return self.entries @ np.asarray(vec, dtype=float)


@dataclass(frozen=True)
class PermutationMixture:
    """Convex combination ``sum_j w_j P_j`` with ``(P_j p)[i] = p[perm_j[i]]``."""

    terms: tuple

    def __post_init__(self):
        terms = []
        for w, perm in self.terms:
            perm = np.asarray(perm, dtype=np.int64)
            perm.setflags(write=False)
            terms.append((float(w), perm))
        if not terms:
            raise ValueError("empty mixture")
        n = len(terms[0][1])
        for w, perm in terms:
            if len(perm) != n or not np.array_equal(np.sort(perm), np.arange(n)):
                raise ValueError("every term must be a permutation of 0..dim-1")
            if w < 0:
                raise ValueError("negative weight")
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def identity(cls, dim: int) -> "PermutationMixture":
        return cls(((1.0, np.arange(dim)),))

    @property
    def dim(self) -> int:
        return len(self.terms[0][1])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.terms])

    def __len__(self):
        return len(self.terms)

    def matrix(self) -> np.ndarray:
        n = self.dim
        m = np.zeros((n, n))
        rows = np.arange(n)
        for w, perm in self.terms:
            m[rows, perm] += w
        return m

    def to_json(self) -> dict:
        return {"terms": [{"w": w, "perm": perm.tolist()} for w, perm in self.terms]}

    @classmethod
    def from_json(cls, obj: dict) -> "PermutationMixture":
        return cls(tuple((t["w"], t["perm"]) for t in obj["terms"]))


def transfer_matrix(p: Sequence[float], q: Sequence[float]) -> DoublyStochastic:
    """Doubly stochastic ``D`` with ``D @ p = q``, as a chain of T-transforms.

    Raises :class:`NotMajorized` (carrying the first violated Ky Fan index)
    unless ``q`` is more mixed than ``p``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise DimensionMismatch(f"vector shapes differ: {p.shape} vs {q.shape}")
    k = first_violation(Spectrum.from_probabilities(q), Spectrum.from_probabilities(p))
    if k is not None:
        raise NotMajorized(k)
    n = len(p)
    ip = np.argsort(-p, kind="stable")
    iq = np.argsort(-q, kind="stable")
    x = p[ip].copy()
    target = q[iq]
    ds = np.eye(n)
    chain = []
    for _ in range(2 * n):
        diff = x - target
        above = np.nonzero(diff > _ULP_TOL)[0]
        if len(above) == 0:
            break
        j = above[-1]
        below = np.nonzero(diff[j + 1:] < -_ULP_TOL)[0]
        if len(below) == 0:
            break  # leftover within the majorization slack
        k = j + 1 + below[0]
        delta = min(diff[j], -diff[k])
        lam = delta / (x[j] - x[k])
        # T = (1 - lam) I + lam * swap(j, k)
        rj, rk = ds[j].copy(), ds[k].copy()
        ds[j] = (1 - lam) * rj + lam * rk
        ds[k] = lam * rj + (1 - lam) * rk
        if diff[j] <= -diff[k]:
            x[k] += x[j] - target[j]
            x[j] = target[j]
        else:
            x[j] -= target[k] - x[k]
            x[k] = target[k]
        chain.append((int(ip[j]), int(ip[k]), float(lam)))
    d = np.zeros((n, n))
    d[np.ix_(iq, ip)] = ds
    err = np.max(np.abs(d @ p - q), initial=0.0)
    if err > TRANSFER_TOL:
        raise NotMajorized(None, f"T-transform chain left residual {err:.3g}")
    return DoublyStochastic(d, tuple(chain))


def _augment(row, adj, match_col, seen) -> bool:
    for col in adj[row]:
        if not seen[col]:
            seen[col] = True
            if match_col[col] < 0 or _augment(match_col[col], adj, match_col, seen):
                match_col[col] = row
                return True
    return False


def perfect_matching(support: np.ndarray, start: np.ndarray | None = None) -> np.ndarray | None:
    """Row-to-column perfect matching on a boolean support, or ``None``.

    Kuhn's augmenting paths; rows and columns are tried lowest index first.
    ``start`` (a previous matching, ``-1`` for unmatched rows) is kept where
    its edges survive.
    """
    n = support.shape[0]
    adj = [np.nonzero(support[i])[0].tolist() for i in range(n)]
    match_col = np.full(n, -1, dtype=np.int64)
    if start is not None:
        for i, c in enumerate(start):
            if c >= 0 and support[i, c]:
                match_col[c] = i
    matched_rows = set(int(r) for r in match_col if r >= 0)
    for row in range(n):
        if row in matched_rows:
            continue
        if not _augment(row, adj, match_col, np.zeros(n, dtype=bool)):
            return None
    perm = np.empty(n, dtype=np.int64)
    perm[match_col] = np.arange(n)
    return perm


def birkhoff(d: DoublyStochastic | np.ndarray) -> PermutationMixture:
    """Greedy Birkhoff-von Neumann decomposition.

    Each round extracts a permutation supported on the positive entries and
    subtracts its smallest entry, zeroing at least one entry; the number of
    rounds is at most ``(dim - 1)**2 + 1``.
    """
    m = np.array(d.entries if isinstance(d, DoublyStochastic) else d, dtype=float)
    n = m.shape[0]
    m[m < ZERO_TOL] = 0.0
    rows = np.arange(n)
    terms = []
    perm = None
    while True:
        remaining = m.sum() / n
        if remaining <= ZERO_TOL:
            break
        perm = perfect_matching(m > 0, perm)
        if perm is None:
            if remaining <= STALL_TOL:
                break
            raise DecompositionStalled(f"no perfect matching with {remaining:.3g} mass left")
        w = m[rows, perm].min()
        m[rows, perm] -= w
        m[m < ZERO_TOL] = 0.0
        terms.append((w, perm))
    return PermutationMixture(tuple(terms))


def apply_mixture(m: PermutationMixture, p: Sequence[float]) -> np.ndarray:
    """``q[i] = sum_j w_j p[perm_j[i]]``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (m.dim,):
        raise DimensionMismatch(f"vector of length {len(p)} vs mixture dim {m.dim}")
    out = np.zeros_like(p)
    for w, perm in m.terms:
        out += w * p[perm]
    return out
