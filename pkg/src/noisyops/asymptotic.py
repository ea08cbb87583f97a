"""Typical sets and the many-copy protocols: distillation, formation, audits.

All work happens on multiplicity spectra of ``s^{(x) n}``. The distillation
map flattens the typical block onto ``D`` slots with ``D`` equiprobable cyclic
shifts (exact, ancilla of dimension ``D``); formation spreads a flat register of
rank ``D'`` over the typical eigenvalues by largest-remainder counting on a
maximally mixed ancilla of ``2**a`` states. Both are evaluated in closed form
at any ``n`` and, for small ``n``, replayed explicitly through
:mod:`noisyops.protocol`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientN, OutOfRange, TargetHasNoInformation
from .mixing import PermutationMixture
from .protocol import NoChannel, NoisyProtocol, AddMaximallyMixed, Permute, TraceOutAncilla
from .spectra import Spectrum, as_spectrum, entropy, info, monotone_summary, tensor_power

NO_INFO_TOL = 1e-12
# explicit replay limits: n*log2(d) bits, and dim * number-of-permutations
SMALL_N_BITS = 20
MAX_EXPLICIT_WORK = 1 << 23
REQUIRED_N_CAP = 1 << 16

_NEG_INF = -math.inf


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


# -- typical sets -------------------------------------------------------------


@dataclass(frozen=True)
class TypicalSet:
    n: int
    delta: float
    entropy: float
    power: Spectrum = field(repr=False)
    mask: tuple  # per entry of ``power``: inside the band?
    weight: float
    cardinality: int

    @property
    def log_cardinality(self) -> float:
        return math.log2(self.cardinality) if self.cardinality else _NEG_INF

    @property
    def included_values(self) -> list[float]:
        return [float(2.0**lv) for lv, inc in zip(self.power.log_values, self.mask) if inc]

    @property
    def band(self) -> tuple[float, float]:
        """``(log2 lower, log2 upper)`` limits of the band."""
        return (-self.n * (self.entropy + self.delta), -self.n * (self.entropy - self.delta))


def typical_set(s: Spectrum, n: int, delta: float, power: Spectrum | None = None) -> TypicalSet:
    """Distinct eigenvalues of ``s^{(x) n}`` inside ``[2^{-n(S+delta)}, 2^{-n(S-delta)}]``."""
    s = as_spectrum(s)
    if delta <= 0:
        raise ValueError("delta must be positive")
    power = power if power is not None else tensor_power(s, n)
    h = entropy(s)
    if s.is_pure():
        mask = tuple(i == 0 for i in range(len(power)))
    elif s.is_maximally_mixed():
        mask = (True,) * len(power)
    else:
        lo, hi = -n * (h + delta), -n * (h - delta)
        tol = 1e-12 * n * (h + delta + 1.0)
        mask = tuple(bool(lo - tol <= lv <= hi + tol) for lv in power.log_values)
    weight = math.fsum(w for w, inc in zip(power.weights, mask) if inc)
    card = sum(m for m, inc in zip(power.multiplicities, mask) if inc)
    return TypicalSet(n, delta, h, power, mask, min(weight, 1.0), card)


def required_n(s: Spectrum, delta: float, epsilon: float, start: int = 1, cap: int = REQUIRED_N_CAP) -> int | None:
    """Advisory ``n`` with typical weight >= 1 - epsilon (doubling, then bisection).

    The weight is not monotone in ``n`` at small scales, so the result is a
    threshold found by search rather than a certified minimum.
    """
    s = as_spectrum(s)

    def ok(n):
        return typical_set(s, n, delta).weight >= 1 - epsilon

    n = max(1, start)
    lo = None
    while not ok(n):
        lo = n
        n *= 2
        if n > cap:
            return None
    if lo is None:
        return n
    while n - lo > 1:
        mid = (lo + n) // 2
        if ok(mid):
            n = mid
        else:
            lo = mid
    return n


# -- reports ------------------------------------------------------------------


@dataclass(frozen=True)
class RateReport:
    direction: str  # "distill" | "form" | "mixedToMixed"
    n: int
    delta: float
    epsilon: float
    yield_per_copy: float  # distill: pure qubits out per copy; form: pure qubits in per copy
    trace_error: float  # a priori bound
    measured_error: float  # exact, from the closed-form output spectrum
    typical_weight: float
    epsilon_met: bool
    log_d: float  # log2 D (distill) or log2 D' (form)
    pure_qubits: float
    noise_qubits: float
    monotones_before: dict
    monotones_after: dict
    explicit_error: float | None = None  # replay through the protocol module, small n only

    CSV_COLUMNS = ("direction", "n", "delta", "epsilon", "yieldPerCopy", "traceError", "infoBefore", "infoAfter")

    def to_json(self) -> dict:
        return {
            "direction": self.direction,
            "n": self.n,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "yieldPerCopy": self.yield_per_copy,
            "traceError": self.trace_error,
            "measuredError": self.measured_error,
            "explicitError": self.explicit_error,
            "typicalWeight": self.typical_weight,
            "epsilonMet": self.epsilon_met,
            "log2D": self.log_d,
            "pureQubits": self.pure_qubits,
            "noiseQubits": self.noise_qubits,
            "monotonesBefore": self.monotones_before,
            "monotonesAfter": self.monotones_after,
        }

    def csv_row(self) -> tuple:
        return (
            self.direction,
            self.n,
            self.delta,
            self.epsilon,
            self.yield_per_copy,
            self.trace_error,
            self.monotones_before["info"],
            self.monotones_after["info"],
        )


def _check_weight(s, n, delta, epsilon, typ, check_epsilon):
    met = typ.weight >= 1 - epsilon
    if typ.cardinality == 0 or (check_epsilon and not met):
        raise InsufficientN(n, typ.weight, epsilon, required_n(s, delta, epsilon, start=n))
    return met


def _nbits(s: Spectrum, n: int) -> float:
    return n * s.qubits


# -- distillation ---------------------------------------------------------------


@dataclass(frozen=True)
class DistillPlan:
    """Sort the typical eigenvalues first, then mix the first ``D`` slots by ``D`` cyclic shifts."""

    log_d: int
    typical: TypicalSet = field(repr=False)
    output: Spectrum = field(repr=False)
    filled_weight: float  # weight landing in the first D slots

    @property
    def ancilla_dim(self) -> int:
        return 1 << self.log_d

    def slot_order(self) -> np.ndarray:
        """Indices of the expanded ``s^{(x) n}`` vector in slot order (typical first)."""
        power = self.typical.power
        starts = power.cumulative_multiplicities
        typ, rest = [], []
        for j, inc in enumerate(self.typical.mask):
            (typ if inc else rest).append(np.arange(starts[j], starts[j + 1]))
        return np.concatenate(typ + rest)

    def protocol(self) -> NoisyProtocol:
        """One protocol with ``D`` equiprobable permutations on the full space; small cases only."""
        dim = self.typical.power.dim
        d = self.ancilla_dim
        if dim * d > MAX_EXPLICIT_WORK:
            raise OverflowError(f"explicit protocol would need {dim} x {d} permutation entries")
        order = self.slot_order()
        head = np.arange(d)
        terms = []
        for shift in range(d):
            perm = order.copy()
            perm[:d] = order[(head + shift) % d]
            terms.append((1.0 / d, perm))
        return NoisyProtocol(dim, d, (1,) * d, PermutationMixture(tuple(terms)), 0.0)

    def stages(self) -> list[NoisyProtocol]:
        """The same map as a relabelling followed by ``log2 D`` one-qubit-ancilla stages.

        Averaging over all ``D = 2^L`` cyclic shifts equals averaging over each
        shift by ``2^j`` independently, so stage ``j`` mixes the identity with
        that shift using a single maximally mixed ancilla qubit.
        """
        dim = self.typical.power.dim
        if dim > MAX_EXPLICIT_WORK:
            raise OverflowError(f"explicit stages on dimension {dim}")
        ident = np.arange(dim)
        out = [NoisyProtocol(dim, 1, (1,), PermutationMixture(((1.0, self.slot_order()),)), 0.0)]
        d = self.ancilla_dim
        for j in range(self.log_d):
            shift = ident.copy()
            shift[:d] = (ident[:d] + (1 << j)) % d
            out.append(NoisyProtocol(dim, 2, (1, 1), PermutationMixture(((0.5, ident), (0.5, shift))), 0.0))
        return out


def _distill_output(typ: TypicalSet, log_d: int) -> tuple[Spectrum, float]:
    """Closed-form output spectrum of the flattening map applied to the whole tensor power."""
    power = typ.power
    d_slots = 1 << log_d
    free = d_slots - typ.cardinality
    if free < 0:
        raise AssertionError("typical block larger than D")
    filled = [typ.weight]
    logs, mults = [], []
    # atypical eigenvalues fill the remaining slots, largest first
    for lv, m, w, inc in zip(power.log_values, power.multiplicities, power.weights, typ.mask):
        if inc:
            continue
        take = min(free, m)
        if take:
            filled.append(2.0 ** (math.log2(take) + lv) if lv != _NEG_INF else 0.0)
            free -= take
        if m - take:
            logs.append(lv)
            mults.append(m - take)
    c_fill = min(math.fsum(filled), 1.0)
    logs.insert(0, math.log2(c_fill) - log_d if c_fill > 0 else _NEG_INF)
    mults.insert(0, d_slots)
    return Spectrum(logs, mults), c_fill


def distill(s: Spectrum, n: int, delta: float, epsilon: float, *, check_epsilon: bool = True, replay: bool = True):
    """Distil pure qubits from ``s^{(x) n}``.

    Returns ``(RateReport, DistillPlan | None)``. ``D`` is the smallest power
    of two >= ``ceil(c 2^{n(S+delta)})``; the yield is ``n log2 d - log2 D``.
    """
    s = as_spectrum(s)
    n = int(n)
    nbits = _nbits(s, n)
    before = monotone_summary(s)
    before = {k: v * n if k != "kyFan1" else v**n for k, v in before.items()}
    if s.is_pure():
        after = {"qubits": nbits, "entropy": 0.0, "info": nbits, "kyFan1": 1.0}
        rep = RateReport("distill", n, delta, epsilon, s.qubits, 0.0, 0.0, 1.0, True, 0.0, nbits, 0.0, before, after, 0.0)
        return rep, None
    if s.is_maximally_mixed():
        rep = RateReport("distill", n, delta, epsilon, 0.0, 0.0, 0.0, 1.0, True, nbits, 0.0, nbits, before, dict(before), 0.0)
        return rep, None
    typ = typical_set(s, n, delta)
    met = _check_weight(s, n, delta, epsilon, typ, check_epsilon)
    x = math.log2(typ.weight) + n * (typ.entropy + delta)
    log_d = max(math.ceil(x - 1e-9), 0)
    while (1 << log_d) < typ.cardinality:
        log_d += 1
    if log_d >= nbits:
        # nothing distillable at this n: identity map
        after = dict(before)
        rep = RateReport("distill", n, delta, epsilon, 0.0, 0.0, 0.0, typ.weight, met, nbits, 0.0, nbits, before, after, None)
        return rep, None
    output, c_fill = _distill_output(typ, log_d)
    plan = DistillPlan(log_d, typ, output, c_fill)
    pure = nbits - log_d
    bound = 2.0 * (1.0 - typ.weight)
    measured = 2.0 * (1.0 - c_fill)
    explicit = None
    if replay and nbits <= SMALL_N_BITS:
        explicit = explicit_distill_error(plan)
    rep = RateReport(
        "distill", n, delta, epsilon, pure / n, bound, max(measured, 0.0), typ.weight, met,
        float(log_d), pure, float(log_d), before, monotone_summary(output), explicit,
    )
    return rep, plan


def explicit_distill_error(plan: DistillPlan) -> float:
    """Run the staged plan through :func:`protocol.simulate_vector` against pure qubits (x) noise."""
    from .protocol import simulate_vector

    v = plan.typical.power.expand()
    for stage in plan.stages():
        v = simulate_vector(stage, v)
    # the target is flat on the first D slots
    target = np.zeros_like(v)
    target[: plan.ancilla_dim] = 1.0 / plan.ancilla_dim
    return math.fsum(np.abs(v - target))


# -- formation ------------------------------------------------------------------


@dataclass(frozen=True)
class FormationPlan:
    """Counting protocol: ``counts[class]`` slots of the ``D' * 2**a`` flat grid per eigenvalue."""

    log_d: int  # log2 D', the noise register
    ancilla_bits: int  # a, free maximally mixed qubits added and traced out
    typical: TypicalSet = field(repr=False)
    # per typical class: (entries at floor+1, floor)
    counts: tuple = field(repr=False)
    output: Spectrum = field(repr=False)
    dilution_error: float

    def channel(self) -> NoChannel:
        """Explicit channel on the flat input ``pure |0..0> (x) noise(D')``; small n only."""
        power = self.typical.power
        dim = power.dim
        n_anc = 1 << self.ancilla_bits
        if dim * n_anc > MAX_EXPLICIT_WORK:
            raise OverflowError("explicit formation channel too large")
        grid = (1 << self.log_d) * n_anc  # occupied joint slots are 0..grid-1
        starts = power.cumulative_multiplicities
        dest_counts = np.zeros(dim, dtype=np.int64)
        ci = 0
        for j, inc in enumerate(self.typical.mask):
            if not inc:
                continue
            k, f = self.counts[ci]
            ci += 1
            block = np.arange(starts[j], starts[j + 1])
            dest_counts[block] = f
            dest_counts[block[:k]] += 1
        if dest_counts.sum() != grid or dest_counts.max(initial=0) > n_anc:
            raise AssertionError("inconsistent counting plan")
        # new[x] = old[perm[x]]; joint index x = output_index * n_anc + ancilla
        perm = np.empty(dim * n_anc, dtype=np.int64)
        filled = np.zeros(dim * n_anc, dtype=bool)
        for i in range(dim):
            filled[i * n_anc: i * n_anc + dest_counts[i]] = True
        targets = np.nonzero(filled)[0]
        perm[targets] = np.arange(grid)
        perm[~filled] = np.arange(grid, dim * n_anc)
        return NoChannel(dim, (AddMaximallyMixed(n_anc), Permute(perm), TraceOutAncilla(n_anc)))


def _ratio_gap(count_over: float) -> float:
    return abs(count_over - 1.0)


def _counting(typ: TypicalSet, log_d: int, a: int):
    """Largest-remainder integer counts approximating ``(p_i / c) * D' 2^a`` on the typical classes."""
    power = typ.power
    c = typ.weight
    shift = log_d + a
    grid = 1 << shift
    classes = []
    for lv, m, w, inc in zip(power.log_values, power.multiplicities, power.weights, typ.mask):
        if not inc:
            continue
        t = 2.0 ** (lv - math.log2(c) + shift)  # target count per entry, <= 2^a
        f = math.floor(t)
        classes.append([lv, m, w, t, f, 0])
    deficit = grid - sum(cl[1] * cl[4] for cl in classes)
    if deficit >= 0:
        for cl in sorted(classes, key=lambda cl: -(cl[3] - cl[4])):
            if deficit == 0:
                break
            k = min(cl[1], deficit)
            cl[5] = k
            deficit -= k
    else:
        # float targets overshot the grid: lower the smallest remainders
        excess = -deficit
        for cl in sorted(classes, key=lambda cl: cl[3] - cl[4]):
            if excess == 0:
                break
            if cl[4] == 0:
                continue
            k = min(cl[1], excess)
            cl[4] -= 1
            cl[5] = cl[1] - k  # k entries drop to f-1, the rest keep f (now f-1 + 1)
            excess -= k
    if deficit > 0:
        raise AssertionError("typical classes cannot absorb the grid")
    counts, logs, mults = [], [], []
    dil, err = [], []
    for lv, m, w, t, f, k in classes:
        counts.append((k, f))
        for num, cnt in ((f + 1, k), (f, m - k)):
            if cnt == 0:
                continue
            if num > 0:
                logs.append(math.log2(num) - shift)
                mults.append(cnt)
            frac = cnt / m
            dil.append((w / c) * frac * _ratio_gap(num / t))
            err.append(w * frac * _ratio_gap(num / (c * t)))
    zero = power.dim - sum(mults)
    if zero:
        logs.append(_NEG_INF)
        mults.append(zero)
    # the atypical eigenvalues are not produced at all
    err.append(1.0 - c)
    return tuple(counts), Spectrum(logs, mults), math.fsum(dil), math.fsum(err)


def form(
    s: Spectrum,
    n: int,
    delta: float,
    epsilon: float,
    *,
    check_epsilon: bool = True,
    dilution: float | None = None,
    replay: bool = True,
):
    """Form ``s^{(x) n}`` from pure qubits plus maximally mixed noise.

    ``D'`` is the largest power of two <= ``floor(c 2^{n(S-delta)})``; the
    pure cost is ``n log2 d - log2 D'`` qubits and ``log2 D'`` noise qubits are
    consumed. ``dilution`` (default ``epsilon``) sets the free ancilla size of
    the counting step. Returns ``(RateReport, FormationPlan | None)``.
    """
    s = as_spectrum(s)
    n = int(n)
    nbits = _nbits(s, n)
    target = monotone_summary(s)
    target = {k: v * n if k != "kyFan1" else v**n for k, v in target.items()}
    if s.is_pure():
        before = {"qubits": nbits, "entropy": 0.0, "info": nbits, "kyFan1": 1.0}
        rep = RateReport("form", n, delta, epsilon, s.qubits, 0.0, 0.0, 1.0, True, 0.0, nbits, 0.0, before, target, 0.0)
        return rep, None
    if s.is_maximally_mixed():
        rep = RateReport("form", n, delta, epsilon, 0.0, 0.0, 0.0, 1.0, True, nbits, 0.0, nbits, dict(target), target, 0.0)
        return rep, None
    typ = typical_set(s, n, delta)
    met = _check_weight(s, n, delta, epsilon, typ, check_epsilon)
    x = math.log2(typ.weight) + n * (typ.entropy - delta)
    log_d = min(max(math.floor(x + 1e-9), 0), math.floor(nbits))
    eta = epsilon if dilution is None else dilution
    # counting error <= |TYP| / (D' 2^a)
    a = max(0, math.ceil(typ.log_cardinality - log_d + math.log2(1.0 / eta)))
    counts, output, dil, err = _counting(typ, log_d, a)
    plan = FormationPlan(log_d, a, typ, counts, output, dil)
    pure = nbits - log_d
    before = {"qubits": nbits, "entropy": float(log_d), "info": pure, "kyFan1": 2.0**-log_d}
    explicit = None
    if replay and nbits <= SMALL_N_BITS and typ.power.dim * (1 << a) <= MAX_EXPLICIT_WORK:
        explicit = explicit_form_error(plan)
    rep = RateReport(
        "form", n, delta, epsilon, pure / n, 2.0 * (1.0 - typ.weight) + dil, err, typ.weight, met,
        float(log_d), pure, float(log_d), before, monotone_summary(output), explicit,
    )
    return rep, plan


def explicit_form_error(plan: FormationPlan) -> float:
    """Apply :meth:`FormationPlan.channel` to the flat input and compare with ``s^{(x) n}``."""
    power = plan.typical.power
    flat = np.zeros(power.dim)
    flat[: 1 << plan.log_d] = 1.0 / (1 << plan.log_d)
    out = plan.channel().apply(flat)
    return math.fsum(np.abs(out - power.expand()))


# -- rates, continuity, audits -------------------------------------------------------


def mixed_to_mixed_rate(a: Spectrum, b: Spectrum) -> float:
    """Optimal asymptotic conversion rate ``info(a) / info(b)``."""
    ib = info(b)
    if ib <= NO_INFO_TOL:
        raise TargetHasNoInformation("target carries no information; the rate diverges")
    return info(a) / ib


def mixed_to_mixed(a: Spectrum, b: Spectrum, n: int, delta: float, epsilon: float) -> RateReport:
    """Distil ``a^{(x) n}`` and form as many copies ``m`` of ``b`` as the pure qubits pay for."""
    a, b = as_spectrum(a), as_spectrum(b)
    rate = mixed_to_mixed_rate(a, b)
    dist, _ = distill(a, n, delta, epsilon, check_epsilon=False, replay=False)
    budget = dist.pure_qubits

    def cost(m):
        return form(b, m, delta, epsilon, check_epsilon=False, replay=False)[0]

    lo, hi = 0, max(1, math.ceil(2 * rate * n) + 2)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cost(mid).pure_qubits <= budget + 1e-9:
            lo = mid
        else:
            hi = mid
    formed = cost(lo) if lo else None
    err = dist.trace_error + (formed.trace_error if formed else 0.0)
    return RateReport(
        "mixedToMixed", n, delta, epsilon, lo / n, err,
        dist.measured_error + (formed.measured_error if formed else 0.0),
        dist.typical_weight, dist.epsilon_met and (formed.epsilon_met if formed else True),
        dist.log_d, budget, dist.noise_qubits, dist.monotones_before,
        formed.monotones_after if formed else {"qubits": 0.0, "entropy": 0.0, "info": 0.0, "kyFan1": 1.0},
    )


@dataclass(frozen=True)
class ContinuityBound:
    qubits: float
    trace_distance: float
    bound: float


def fannes_bound(qubits: float, trace_distance: float) -> ContinuityBound:
    """Explicit entropy continuity bound for states on ``qubits`` qubits.

    With ``t = T/2``: ``t log2(2^N - 1) + h(t)`` for ``t < 1 - 2^-N``, else ``N``
    (the maximum), which keeps the bound monotone in ``T``.
    """
    if qubits < 0:
        raise OutOfRange("qubit count must be nonnegative")
    if not -1e-12 <= trace_distance <= 2 + 1e-12:
        raise OutOfRange(f"trace distance {trace_distance!r} outside [0, 2]")
    t = min(max(trace_distance / 2, 0.0), 1.0)
    d = 2.0**qubits
    if t >= 1 - 1 / d:
        bound = float(qubits)
    else:
        bound = t * math.log2(d - 1) + binary_entropy(t) if d > 1 else 0.0
    return ContinuityBound(qubits, trace_distance, bound)


@dataclass(frozen=True)
class OptimalityRow:
    n: int
    pure_in: float
    pure_out: float
    ratio: float
    loss_per_copy: float
    epsilon_met: bool


@dataclass(frozen=True)
class OptimalityAudit:
    delta: float
    epsilon: float
    rows: tuple

    @property
    def ratio_ok(self) -> bool:
        return all(r.ratio <= 1 + 1e-9 for r in self.rows)

    @property
    def loss_ok(self) -> bool:
        return all(r.loss_per_copy <= 2 * self.delta + 4 / r.n + 1e-12 for r in self.rows)

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "epsilon": self.epsilon,
            "ratioOk": self.ratio_ok,
            "lossOk": self.loss_ok,
            "rows": [
                {"n": r.n, "pureIn": r.pure_in, "pureOut": r.pure_out, "ratio": r.ratio,
                 "lossPerCopy": r.loss_per_copy, "epsilonMet": r.epsilon_met}
                for r in self.rows
            ],
        }


def optimality_audit(s: Spectrum, n_list, delta: float = 0.02, epsilon: float = 0.01) -> OptimalityAudit:
    """Round trip pure -> s^{(x) n} -> pure; the qubit ratio out/in must not exceed 1."""
    s = as_spectrum(s)
    if info(s) <= NO_INFO_TOL:
        raise TargetHasNoInformation("maximally mixed state: nothing to audit")
    rows = []
    for n in sorted(int(x) for x in n_list):
        f, _ = form(s, n, delta, epsilon, check_epsilon=False, replay=False)
        d, _ = distill(s, n, delta, epsilon, check_epsilon=False, replay=False)
        ratio = d.pure_qubits / f.pure_qubits
        rows.append(OptimalityRow(n, f.pure_qubits, d.pure_qubits, ratio, (f.pure_qubits - d.pure_qubits) / n, f.epsilon_met and d.epsilon_met))
    return OptimalityAudit(delta, epsilon, tuple(rows))


def rigidity_experiment(free_ancilla: Spectrum, n: int = 2000, delta: float | None = None, epsilon: float = 0.01) -> dict:
    """Would a free ancilla other than the maximally mixed state trivialise the theory?

    A free supply of a state with positive information yields pure qubits at
    rate ``info`` per copy; two pure qubits make one noise qubit, so every
    state becomes free and all rates diverge.
    """
    s = as_spectrum(free_ancilla)
    rate = info(s)
    if rate <= NO_INFO_TOL:
        return {"verdict": "nontrivial", "ratesFinite": True, "yieldPerCopy": 0.0}
    dl = delta if delta is not None else rate / 2
    rep, _ = distill(s, n, dl, epsilon, check_epsilon=False, replay=False)
    return {
        "verdict": "trivial",
        "ratesFinite": False,
        "yieldPerCopy": rate,
        "finiteN": {"n": n, "delta": dl, "yieldPerCopy": rep.yield_per_copy, "typicalWeight": rep.typical_weight},
        "noiseQubitsPerCopy": rate / 2,
    }
