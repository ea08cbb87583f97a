"""Eigenvalue multisets, entropy monotones and the "more mixed" order.

A :class:`Spectrum` stores distinct eigenvalues in nonincreasing order together
with exact integer multiplicities. Values are kept as base-2 logarithms so that
tensor powers with thousands of factors (eigenvalues far below the smallest
double) stay representable; every weight ``multiplicity * value`` is <= 1 and
is therefore always finite.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidSpectrum

SUM_TOL = 1e-12
MAJORIZATION_SLACK = 1e-12
GROUP_RTOL = 1e-12
# Explicit dense vectors are only materialised up to this many entries.
MAX_EXPLICIT_DIM = 1 << 24
MAX_TYPE_CLASSES = 5_000_000

_NEG_INF = -math.inf
_GROUP_LOG_TOL = math.log2(1.0 + GROUP_RTOL)


def _log2_int(m: int) -> float:
    return math.log2(m)


def _merge_tol(logv: float) -> float:
    # products of many factors carry ~|log| ulps of rounding in the exponent
    return _GROUP_LOG_TOL + 1e-15 * abs(logv)


def _group(logs: Sequence[float], mults: Sequence[int]) -> tuple[np.ndarray, tuple[int, ...]]:
    order = sorted(range(len(logs)), key=lambda i: -logs[i])
    out_logs: list[float] = []
    out_mults: list[int] = []
    for i in order:
        lv, m = float(logs[i]), int(mults[i])
        if m == 0:
            continue
        if out_logs:
            prev = out_logs[-1]
            if (prev == _NEG_INF and lv == _NEG_INF) or (
                prev != _NEG_INF and lv != _NEG_INF and prev - lv <= _merge_tol(prev)
            ):
                out_mults[-1] += m
                continue
        out_logs.append(lv)
        out_mults.append(m)
    return np.array(out_logs, dtype=float), tuple(out_mults)


class Spectrum:
    """Immutable eigenvalue multiset ``{(value, multiplicity)}``, sorted nonincreasing."""

    __slots__ = ("_logs", "_mults", "_dim", "_weights", "_cum_mults", "_cum_weights")

    def __init__(self, log_values: Iterable[float], multiplicities: Iterable[int], *, normalize: bool = True):
        logs = [float(x) for x in log_values]
        mults = [int(m) for m in multiplicities]
        if len(logs) != len(mults):
            raise InvalidSpectrum("log_values and multiplicities differ in length")
        if not logs:
            raise InvalidSpectrum("empty spectrum")
        if any(m < 0 for m in mults):
            raise InvalidSpectrum("multiplicities must be positive")
        if any(math.isnan(x) or x > 1e-12 for x in logs):
            raise InvalidSpectrum("eigenvalues must lie in [0, 1]")
        glogs, gmults = _group(logs, mults)
        if not gmults:
            raise InvalidSpectrum("empty spectrum")
        glogs = np.minimum(glogs, 0.0)
        weights = self._weights_of(glogs, gmults)
        total = math.fsum(weights)
        if abs(total - 1.0) > (1e-9 if normalize else SUM_TOL):
            raise InvalidSpectrum(f"eigenvalues sum to {total!r}, not 1")
        if normalize and total != 1.0:
            glogs = glogs - math.log2(total)
            weights = self._weights_of(glogs, gmults)
        glogs.setflags(write=False)
        weights.setflags(write=False)
        self._logs = glogs
        self._mults = gmults
        self._dim = sum(gmults)
        self._weights = weights
        self._cum_mults = tuple(itertools.accumulate(gmults, initial=0))
        cw = np.concatenate(([0.0], np.cumsum(weights)))
        cw.setflags(write=False)
        self._cum_weights = cw

    @staticmethod
    def _weights_of(logs: np.ndarray, mults: Sequence[int]) -> np.ndarray:
        out = np.zeros(len(mults))
        for i, (lv, m) in enumerate(zip(logs, mults)):
            if lv != _NEG_INF:
                out[i] = 2.0 ** (lv + _log2_int(m))
        return out

    # -- constructors -------------------------------------------------
    @classmethod
    def from_probabilities(cls, values: Iterable[float], multiplicities: Iterable[int] | None = None) -> "Spectrum":
        vals = [float(v) for v in values]
        mults = [1] * len(vals) if multiplicities is None else [int(m) for m in multiplicities]
        logs = []
        for v in vals:
            if v < -SUM_TOL or v > 1 + SUM_TOL or math.isnan(v):
                raise InvalidSpectrum(f"eigenvalue {v!r} outside [0, 1]")
            logs.append(math.log2(v) if v > 0 else _NEG_INF)
        return cls(logs, mults)

    @classmethod
    def pure(cls, dim: int) -> "Spectrum":
        return cls.flat(1, dim)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "Spectrum":
        return cls.flat(dim, dim)

    @classmethod
    def flat(cls, rank: int, dim: int) -> "Spectrum":
        """Uniform over ``rank`` eigenvectors, zero on the remaining ``dim - rank``."""
        rank, dim = int(rank), int(dim)
        if not 1 <= rank <= dim:
            raise InvalidSpectrum(f"need 1 <= rank <= dim, got rank={rank}, dim={dim}")
        logs, mults = [-_log2_int(rank)], [rank]
        if dim > rank:
            logs.append(_NEG_INF)
            mults.append(dim - rank)
        return cls(logs, mults)

    # -- accessors ----------------------------------------------------
    @property
    def log_values(self) -> np.ndarray:
        return self._logs

    @property
    def values(self) -> np.ndarray:
        return np.exp2(self._logs)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return self._mults

    @property
    def weights(self) -> np.ndarray:
        """``multiplicity * value`` per distinct entry."""
        return self._weights

    @property
    def entries(self) -> list[tuple[float, int]]:
        return [(float(v), m) for v, m in zip(self.values, self._mults)]

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def qubits(self) -> float:
        d = self._dim
        if d & (d - 1) == 0:
            return float(d.bit_length() - 1)
        return _log2_int(d)

    @property
    def cumulative_multiplicities(self) -> tuple[int, ...]:
        return self._cum_mults

    @property
    def cumulative_weights(self) -> np.ndarray:
        return self._cum_weights

    @property
    def rank(self) -> int:
        return sum(m for lv, m in zip(self._logs, self._mults) if lv != _NEG_INF)

    def is_pure(self, tol: float = SUM_TOL) -> bool:
        return self._mults[0] == 1 and self._weights[0] >= 1.0 - tol

    def is_maximally_mixed(self) -> bool:
        return len(self._mults) == 1

    def expand(self) -> np.ndarray:
        """Full nonincreasing eigenvalue vector of length ``dim``."""
        if self._dim > MAX_EXPLICIT_DIM:
            raise OverflowError(f"refusing to expand a spectrum of dimension {self._dim}")
        return np.repeat(self.values, self._mults)

    def __len__(self) -> int:
        return len(self._mults)

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        if self._mults != other._mults:
            return False
        a, b = self._logs, other._logs
        finite = np.isfinite(a)
        if not np.array_equal(finite, np.isfinite(b)):
            return False
        return bool(np.all(np.abs(a[finite] - b[finite]) <= [_merge_tol(x) for x in a[finite]]))

    __hash__ = None

    def __repr__(self):
        shown = ", ".join(f"({v:.6g}, {m})" for v, m in self.entries[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"Spectrum([{shown}{more}], dim={self._dim})"

    # -- serialization ------------------------------------------------
    def to_json(self) -> dict:
        rows = []
        for lv, v, m in zip(self._logs, self.values, self._mults):
            row = [float(v), str(m)]
            if v == 0.0 and lv != _NEG_INF:
                row.append(float(lv))  # underflowed value, keep its log2
            rows.append(row)
        return {"entries": rows}

    @classmethod
    def from_json(cls, obj: dict) -> "Spectrum":
        if "probabilities" in obj:
            return cls.from_probabilities(obj["probabilities"])
        try:
            rows = obj["entries"]
            logs, mults = [], []
            for row in rows:
                v, m = float(row[0]), int(row[1])
                if len(row) > 2:
                    logs.append(float(row[2]))
                else:
                    if v < 0:
                        raise InvalidSpectrum(f"negative eigenvalue {v!r}")
                    logs.append(math.log2(v) if v > 0 else _NEG_INF)
                mults.append(m)
        except (KeyError, TypeError, IndexError) as exc:
            raise InvalidSpectrum(f"malformed spectrum JSON: {exc}") from exc
        return cls(logs, mults)


@dataclass(frozen=True)
class MonotoneVector:
    ky_fan: np.ndarray
    entropy: float
    info: float


def as_spectrum(s) -> Spectrum:
    if isinstance(s, Spectrum):
        return s
    return Spectrum.from_probabilities(s)


def entropy(s: Spectrum) -> float:
    """Von Neumann entropy in bits, with ``0 log 0 = 0``."""
    s = as_spectrum(s)
    terms = [-w * lv for w, lv in zip(s.weights, s.log_values) if w > 0]
    h = math.fsum(terms)
    return min(max(h, 0.0), s.qubits)


def info(s: Spectrum) -> float:
    """Information content ``log2(dim) - entropy``."""
    s = as_spectrum(s)
    return max(s.qubits - entropy(s), 0.0)


def ky_fan(s: Spectrum, k: int) -> float:
    """Sum of the ``k`` largest eigenvalues (``k`` may be a huge integer)."""
    if k <= 0:
        return 0.0
    if k >= s.dim:
        return float(s.cumulative_weights[-1])
    cm = s.cumulative_multiplicities
    j = bisect.bisect_right(cm, k) - 1
    base = float(s.cumulative_weights[j])
    rest = k - cm[j]
    if rest == 0 or s.log_values[j] == _NEG_INF:
        return base
    return base + 2.0 ** (_log2_int(rest) + s.log_values[j])


def ky_fan_norms(s: Spectrum) -> MonotoneVector:
    s = as_spectrum(s)
    return MonotoneVector(np.cumsum(s.expand()), entropy(s), info(s))


def _check_dims(a: Spectrum, b: Spectrum) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")


def first_violation(q: Spectrum, p: Spectrum, slack: float = MAJORIZATION_SLACK) -> int | None:
    """Smallest ``k`` with ``ky_fan(q, k) > ky_fan(p, k) + slack``, or ``None``.

    ``q - p`` partial sums are linear between breakpoints of ``q`` while those
    of ``p`` are concave, so the gap is concave on each segment and only the
    breakpoints of ``q`` need checking; inside the first failing segment the
    crossing is found by bisection.
    """
    q, p = as_spectrum(q), as_spectrum(p)
    _check_dims(q, p)

    def bad(k):
        return ky_fan(q, k) > ky_fan(p, k) + slack

    cm = q.cumulative_multiplicities
    for j in range(1, len(cm)):
        if bad(cm[j]):
            lo, hi = cm[j - 1], cm[j]  # lo is fine (or 0), hi violates
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if bad(mid):
                    hi = mid
                else:
                    lo = mid
            return hi
    return None


def more_mixed(q: Spectrum, p: Spectrum) -> bool:
    """True iff ``q`` is more mixed than ``p`` (``p`` majorizes ``q``)."""
    return first_violation(q, p) is None


def tensor(a: Spectrum, b: Spectrum) -> Spectrum:
    a, b = as_spectrum(a), as_spectrum(b)
    logs, mults = [], []
    for la, ma in zip(a.log_values, a.multiplicities):
        for lb, mb in zip(b.log_values, b.multiplicities):
            logs.append(la + lb)
            mults.append(ma * mb)
    return Spectrum(logs, mults)


def _compositions(n: int, t: int):
    if t == 1:
        yield (n,)
        return
    for k in range(n, -1, -1):
        for rest in _compositions(n - k, t - 1):
            yield (k,) + rest


def binomial_row(n: int) -> list[int]:
    """Exact ``[C(n, 0), ..., C(n, n)]`` by the multiplicative recurrence."""
    row = [1] * (n + 1)
    for k in range(n):
        row[k + 1] = row[k] * (n - k) // (k + 1)
    return row


def tensor_power(s: Spectrum, n: int) -> Spectrum:
    """Spectrum of the ``n``-fold tensor power, one entry per type class."""
    s = as_spectrum(s)
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return s
    nz = [(lv, m) for lv, m in zip(s.log_values, s.multiplicities) if lv != _NEG_INF]
    t = len(nz)
    if math.comb(n + t - 1, t - 1) > MAX_TYPE_CLASSES:
        raise OverflowError(f"{math.comb(n + t - 1, t - 1)} type classes exceed the supported size")
    nz_logs = np.array([lv for lv, _ in nz])
    nz_mults = [m for _, m in nz]
    logs: list[float] = []
    mults: list[int] = []
    if t == 2:
        k = np.arange(n, -1, -1)
        logs = list(k * nz_logs[0] + (n - k) * nz_logs[1])
        m0, m1 = nz_mults
        row = binomial_row(n)
        for ki in range(n, -1, -1):
            c = row[ki]
            if m0 != 1:
                c *= m0**ki
            if m1 != 1:
                c *= m1 ** (n - ki)
            mults.append(c)
    else:
        fact = [1] * (n + 1)
        for i in range(1, n + 1):
            fact[i] = fact[i - 1] * i
        for ks in _compositions(n, t):
            logs.append(float(np.dot(ks, nz_logs)))
            den = 1
            for kj in ks:
                den *= fact[kj]
            c = fact[n] // den
            for kj, mj in zip(ks, nz_mults):
                if mj != 1:
                    c *= mj**kj
            mults.append(c)
    nz_dim = sum(nz_mults)
    zero = s.dim**n - nz_dim**n
    if zero:
        logs.append(_NEG_INF)
        mults.append(zero)
    return Spectrum(logs, mults)


def _segment_l1(length: int, la: float, lb: float) -> float:
    if la == lb:
        return 0.0
    hi, lo = max(la, lb), min(la, lb)
    if lo == _NEG_INF:
        return 2.0 ** (_log2_int(length) + hi)
    return 2.0 ** (_log2_int(length) + hi) * -math.expm1((lo - hi) * math.log(2))


def trace_distance_spectra(a, b) -> float:
    """l1 distance between two commuting states.

    Two :class:`Spectrum` objects are aligned in their nonincreasing eigenbasis
    ordering (handled in multiplicity form, never expanded). Plain sequences are
    compared entry by entry in the order given.
    """
    if isinstance(a, Spectrum) and isinstance(b, Spectrum):
        _check_dims(a, b)
        total = []
        i = j = 0
        pos = 0
        ea, eb = a.cumulative_multiplicities, b.cumulative_multiplicities
        while pos < a.dim:
            end = min(ea[i + 1], eb[j + 1])
            total.append(_segment_l1(end - pos, a.log_values[i], b.log_values[j]))
            pos = end
            if pos == ea[i + 1]:
                i += 1
            if pos == eb[j + 1]:
                j += 1
        return math.fsum(total)
    va = a.expand() if isinstance(a, Spectrum) else np.asarray(a, dtype=float)
    vb = b.expand() if isinstance(b, Spectrum) else np.asarray(b, dtype=float)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"dimensions differ: {va.shape} vs {vb.shape}")
    return math.fsum(np.abs(va - vb))


def monotone_summary(s: Spectrum) -> dict:
    s = as_spectrum(s)
    h = entropy(s)
    return {"qubits": s.qubits, "entropy": h, "info": max(s.qubits - h, 0.0), "kyFan1": float(s.values[0])}
