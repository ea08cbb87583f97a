"""Costs without free noise, and the binomial-measurement distillation protocol.

Without a supply of maximally mixed qubits, noise itself must be made from
pure qubits (two pure qubits, entangled, leave one maximally mixed qubit once
the partner is discarded). Distilling ``n`` copies of ``a|0> + b|1>`` is done
by measuring the number of ones: outcome ``k`` leaves a uniform superposition
over ``C(n, k)`` strings, worth ``n - log2 C(n, k)`` pure qubits, and merging
the outcome branches costs ``H({p_k})`` bits of erasure.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import OutOfRange
from .spectra import Spectrum, as_spectrum, entropy

EXACT_N_MAX = 1000
MAX_MULTINOMIAL_DIM = 4
MAX_TYPE_CLASSES = 2_000_000


@dataclass(frozen=True)
class CostLedger:
    n: int
    pure_qubits_in: float
    pure_qubits_out: float
    noise_produced_qubits: float
    erasure_bits: float

    def __post_init__(self):
        for name in ("pure_qubits_in", "pure_qubits_out", "noise_produced_qubits", "erasure_bits"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def net_out(self) -> float:
        """Pure qubits kept after paying for erasure."""
        return self.pure_qubits_out - self.erasure_bits

    @property
    def per_copy(self) -> dict:
        n = max(self.n, 1)
        return {
            "pureQubitsIn": self.pure_qubits_in / n,
            "pureQubitsOut": self.pure_qubits_out / n,
            "noiseProducedQubits": self.noise_produced_qubits / n,
            "erasureBits": self.erasure_bits / n,
            "netOut": self.net_out / n,
        }

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "pureQubitsIn": self.pure_qubits_in,
            "pureQubitsOut": self.pure_qubits_out,
            "noiseProducedQubits": self.noise_produced_qubits,
            "erasureBits": self.erasure_bits,
            "netOut": self.net_out,
            "perCopy": self.per_copy,
        }


# -- closed-form costs ---------------------------------------------------------------


def preparation_cost(s: Spectrum) -> float:
    """Pure qubits needed to make ``s`` without noise: ``N + S``."""
    s = as_spectrum(s)
    return s.qubits + entropy(s)


def garbage_bound(input_entropy: float, output_entropy: float) -> float:
    """Smallest garbage register (qubits) that must be discarded: ``max(0, S_out - S_in)``."""
    if input_entropy < 0 or output_entropy < 0:
        raise OutOfRange("entropies must be nonnegative")
    return max(0.0, output_entropy - input_entropy)


@dataclass(frozen=True)
class ConversionCost:
    cost: float
    delta_qubits: float
    delta_entropy: float
    steps: tuple = field(default=())
    # True when the cost is both necessary and sufficient; False when only the lower bound is certified
    tight: bool = True

    def to_json(self) -> dict:
        return {
            "cost": self.cost,
            "deltaN": self.delta_qubits,
            "deltaS": self.delta_entropy,
            "tight": self.tight,
            "steps": [dict(s) for s in self.steps],
        }


def mixed_to_mixed_cost(a: Spectrum, b: Spectrum) -> ConversionCost:
    """Extra pure qubits needed to turn ``a`` into ``b`` without noise.

    For ``dS >= 0`` this is ``max(0, dN + dS)``: distil ``a``, add ``dN - dS``
    pure qubits plus ``2 dS`` pure qubits to manufacture noise, form ``b``.
    For ``dS < 0`` only the information bound ``max(0, dN - dS)`` is reported
    (flagged ``tight=False``).
    """
    a, b = as_spectrum(a), as_spectrum(b)
    dn = b.qubits - a.qubits
    ds = entropy(b) - entropy(a)
    if ds >= 0:
        steps = (
            {"step": "distill", "pureQubits": a.qubits - entropy(a)},
            {"step": "addPure", "pureQubits": dn - ds},
            {"step": "makeNoise", "pureQubits": 2 * ds, "noiseQubits": ds},
            {"step": "form", "target": b.to_json()},
        )
        return ConversionCost(max(0.0, dn + ds), dn, ds, steps, True)
    steps = (
        {"step": "distill", "pureQubits": a.qubits - entropy(a)},
        {"step": "addPure", "pureQubits": dn - ds},
        {"step": "form", "target": b.to_json()},
    )
    return ConversionCost(max(0.0, dn - ds), dn, ds, steps, False)


# -- binomial protocol -----------------------------------------------------------------


@dataclass(frozen=True)
class BinomialOutcome:
    k: int
    probability: float
    log2_block_dim: float
    n: int
    block_dim_exact: int | None = None
    probability_exact: Fraction | None = None

    @property
    def block_dim(self) -> int:
        """``C(n, k)`` (computed on demand above the exact range)."""
        if self.block_dim_exact is not None:
            return self.block_dim_exact
        return math.comb(self.n, self.k)

    @property
    def pure_yield(self) -> float:
        return self.n - self.log2_block_dim

    def row(self) -> tuple:
        return (self.k, self.probability, self.log2_block_dim, self.pure_yield)


def _parse_a2(a2) -> tuple[float, Fraction | None]:
    exact = None
    if isinstance(a2, Fraction):
        exact = a2
    elif isinstance(a2, str):
        try:
            exact = Fraction(a2) if "/" in a2 else None
            val = float(exact) if exact is not None else float(a2)
        except (ValueError, ZeroDivisionError) as err:
            raise OutOfRange(f"cannot parse a2={a2!r}") from err
        a2 = val
    val = float(a2)
    if not 0.0 < val < 1.0 or (exact is not None and not 0 < exact < 1):
        raise OutOfRange(f"a2 must lie strictly between 0 and 1, got {a2!r}")
    return val, exact


def log2_binomial(n: int, k: int) -> float:
    if n <= EXACT_N_MAX:
        return math.log2(math.comb(n, k))
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / math.log(2)


def _shannon_from_logs(probs: Sequence[float], logs: Sequence[float]) -> float:
    return max(0.0, -math.fsum(p * lg for p, lg in zip(probs, logs) if p > 0))


def binomial_protocol(a2, n: int) -> tuple[list[BinomialOutcome], CostLedger]:
    """Measure the number of ones in ``(a|1> + b|0>)^{(x) n}`` with ``a^2 = a2``.

    ``a2`` may be a float, a :class:`fractions.Fraction` or a string such as
    ``"3/4"``; rational input also yields exact outcome probabilities. The
    ledger holds ``pureQubitsOut = sum p_k I_k`` and ``erasureBits = H({p_k})``.
    """
    val, exact = _parse_a2(a2)
    n = int(n)
    if n < 1:
        raise OutOfRange("n must be at least 1")
    la, lb = math.log2(val), math.log1p(-val) / math.log(2)
    outcomes, logs = [], []
    for k in range(n + 1):
        big = math.comb(n, k) if n <= EXACT_N_MAX else None
        lc = math.log2(big) if big is not None else log2_binomial(n, k)
        lp = lc + k * la + (n - k) * lb
        p_exact = None
        if exact is not None and big is not None:
            p_exact = big * exact**k * (1 - exact) ** (n - k)
        prob = float(p_exact) if p_exact is not None else 2.0**lp
        outcomes.append(BinomialOutcome(k, prob, lc, n, big, p_exact))
        logs.append(lp)
    probs = [o.probability for o in outcomes]
    pure_out = math.fsum(o.probability * o.pure_yield for o in outcomes)
    ledger = CostLedger(n, 0.0, pure_out, 0.0, _shannon_from_logs(probs, logs))
    return outcomes, ledger


def outcomes_csv(outcomes: Sequence[BinomialOutcome]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("k", "p_k", "log2_dk", "I_k"))
    for o in outcomes:
        w.writerow(tuple(repr(x) if isinstance(x, float) else x for x in o.row()))
    return buf.getvalue()


# -- multinomial extension (d <= 4) ------------------------------------------------------


@dataclass(frozen=True)
class TypeOutcome:
    counts: tuple
    probability: float
    log2_block_dim: float
    n: int
    log2_d: float

    @property
    def pure_yield(self) -> float:
        return self.n * self.log2_d - self.log2_block_dim


def _count_vectors(n: int, d: int):
    if d == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _count_vectors(n - first, d - 1):
            yield (first,) + rest


def multinomial_protocol(probs: Sequence[float], n: int) -> tuple[list[TypeOutcome], CostLedger]:
    """Type-class measurement on ``(sum_i sqrt(p_i) |i>)^{(x) n}`` for ``d <= 4`` levels."""
    p = [float(x) for x in probs]
    d = len(p)
    if not 2 <= d <= MAX_MULTINOMIAL_DIM:
        raise OutOfRange(f"multinomial protocol supports 2..{MAX_MULTINOMIAL_DIM} levels")
    if any(x < 0 for x in p) or abs(math.fsum(p) - 1) > 1e-9:
        raise OutOfRange("amplitudes squared must be a probability vector")
    n = int(n)
    if n < 1:
        raise OutOfRange("n must be at least 1")
    if math.comb(n + d - 1, d - 1) > MAX_TYPE_CLASSES:
        raise OutOfRange("too many type classes")
    lfact = [0.0] * (n + 1)
    for i in range(2, n + 1):
        lfact[i] = lfact[i - 1] + math.log2(i)
    lp = [math.log2(x) if x > 0 else -math.inf for x in p]
    outcomes, logs = [], []
    for counts in _count_vectors(n, d):
        if any(c and x == 0 for c, x in zip(counts, p)):
            continue
        lc = lfact[n] - math.fsum(lfact[c] for c in counts)
        lprob = lc + math.fsum(c * l for c, l in zip(counts, lp) if c)
        outcomes.append(TypeOutcome(counts, 2.0**lprob, lc, n, math.log2(d)))
        logs.append(lprob)
    probs_k = [o.probability for o in outcomes]
    pure_out = math.fsum(o.probability * o.pure_yield for o in outcomes)
    return outcomes, CostLedger(n, 0.0, pure_out, 0.0, _shannon_from_logs(probs_k, logs))


# -- scaling and cycles ---------------------------------------------------------------------


@dataclass(frozen=True)
class ErasureRow:
    n: int
    erasure_bits: float
    per_copy: float
    bound: float  # log2(n + 1)


@dataclass(frozen=True)
class ErasureScaling:
    a2: float
    rows: tuple

    @property
    def bounded(self) -> bool:
        return all(r.erasure_bits <= r.bound + 1e-12 for r in self.rows)

    @property
    def decreasing(self) -> bool:
        per = [r.per_copy for r in self.rows]
        return all(b < a for a, b in zip(per, per[1:]))

    def to_json(self) -> dict:
        return {
            "a2": self.a2,
            "bounded": self.bounded,
            "decreasing": self.decreasing,
            "rows": [
                {"n": r.n, "erasureBits": r.erasure_bits, "perCopy": r.per_copy, "bound": r.bound}
                for r in self.rows
            ],
        }


def erasure_cost_scaling(a2, n_list: Sequence[int]) -> ErasureScaling:
    """``H({p_k})`` and ``H({p_k}) / n`` over increasing ``n``."""
    val, _ = _parse_a2(a2)
    rows = []
    for n in sorted(int(x) for x in n_list):
        _, ledger = binomial_protocol(val, n)
        rows.append(ErasureRow(n, ledger.erasure_bits, ledger.erasure_bits / n, math.log2(n + 1)))
    return ErasureScaling(val, tuple(rows))


def cycle_ledger(s: Spectrum, n: int, delta: float = 0.05, epsilon: float = 0.01) -> CostLedger:
    """Pure qubits -> ``s^{(x) n}`` (noiseless preparation) -> pure qubits (distillation)."""
    from .asymptotic import distill

    s = as_spectrum(s)
    report, _ = distill(s, n, delta, epsilon, check_epsilon=False, replay=False)
    return CostLedger(n, n * preparation_cost(s), report.pure_qubits, n * entropy(s), 0.0)
