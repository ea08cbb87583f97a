"""Noisy Operations realising single-copy transitions.

A transition ``p -> q`` with ``q`` more mixed than ``p`` is carried out by
appending a maximally mixed ancilla of dimension ``N``, permuting the joint
eigenbasis block by block, and tracing the ancilla out again. The mixture
weights of the permutations are approximated by group sizes ``N_j / N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .densmat import DensityMatrix
from .errors import AncillaTooSmall, DimensionMismatch, NotMajorized
from .mixing import PermutationMixture, apply_mixture, birkhoff, transfer_matrix
from .spectra import Spectrum, as_spectrum, first_violation, info, tensor

INFO_SLACK = 1e-9
ROUNDING_ULP = 2.0**-50


def largest_remainder(weights: Sequence[float], total: int) -> tuple[int, ...]:
    """Integers summing to ``total`` closest to ``weights * total`` (ties to the lower index)."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    raw = w * total
    base = np.floor(raw).astype(np.int64)
    short = total - int(base.sum())
    frac = raw - base
    order = sorted(range(len(w)), key=lambda j: (-frac[j], j))
    for j in order[:short]:
        base[j] += 1
    return tuple(int(x) for x in base)


@dataclass(frozen=True)
class NoisyProtocol:
    input_dim: int
    ancilla_dim: int
    group_sizes: tuple[int, ...]
    mixture: PermutationMixture
    error_bound: float

    def __post_init__(self):
        if sum(self.group_sizes) != self.ancilla_dim:
            raise ValueError("group sizes must sum to the ancilla dimension")
        if len(self.group_sizes) != len(self.mixture):
            raise ValueError("one group per permutation")
        if self.mixture.dim != self.input_dim:
            raise DimensionMismatch("mixture dimension differs from input dimension")

    @property
    def effective_weights(self) -> np.ndarray:
        return np.array(self.group_sizes, dtype=float) / self.ancilla_dim

    def to_json(self) -> dict:
        return {
            "inputDim": self.input_dim,
            "ancillaDim": self.ancilla_dim,
            "groups": list(self.group_sizes),
            "mixture": self.mixture.to_json(),
            "errorBound": self.error_bound,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NoisyProtocol":
        return cls(
            input_dim=int(obj["inputDim"]),
            ancilla_dim=int(obj["ancillaDim"]),
            group_sizes=tuple(int(g) for g in obj["groups"]),
            mixture=PermutationMixture.from_json(obj["mixture"]),
            error_bound=float(obj.get("errorBound", math.nan)),
        )

    def to_channel(self) -> "NoChannel":
        """The protocol as explicit steps on the ``input_dim * ancilla_dim`` joint space."""
        d, n = self.input_dim, self.ancilla_dim
        perm = np.empty(d * n, dtype=np.int64)
        sys_idx = np.arange(d)
        a = 0
        for size, (_, sigma) in zip(self.group_sizes, self.mixture.terms):
            for anc in range(a, a + size):
                perm[sys_idx * n + anc] = sigma * n + anc
            a += size
        return NoChannel(d, (AddMaximallyMixed(n), Permute(perm), TraceOutAncilla(n)))


def synthesize(p: Spectrum, q: Spectrum, ancilla_dim: int) -> NoisyProtocol:
    """Build a protocol taking ``p`` to (approximately) ``q`` with an ancilla of ``ancilla_dim``."""
    p, q = as_spectrum(p), as_spectrum(q)
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions differ: {p.dim} vs {q.dim}")
    k = first_violation(q, p)
    if k is not None:
        raise NotMajorized(k)
    pv, qv = p.expand(), q.expand()
    mixture = birkhoff(transfer_matrix(pv, qv))
    if ancilla_dim < len(mixture):
        raise AncillaTooSmall(f"ancilla dimension {ancilla_dim} < {len(mixture)} permutations")
    alpha = mixture.weights / mixture.weights.sum()
    groups = largest_remainder(alpha, ancilla_dim)
    weight_err = math.fsum(abs(g / ancilla_dim - a) for g, a in zip(groups, alpha))
    exact_weights = PermutationMixture(tuple(zip(alpha, (t[1] for t in mixture.terms))))
    residual = math.fsum(np.abs(apply_mixture(exact_weights, pv) - qv))
    # summing several permuted copies rounds by a few ulps per entry
    rounding = 0.0 if len(mixture) == 1 else p.dim * ROUNDING_ULP
    return NoisyProtocol(p.dim, int(ancilla_dim), groups, mixture, weight_err + residual + rounding)


def simulate_vector(proto: NoisyProtocol, p) -> np.ndarray:
    """Output probabilities ``sum_j (N_j / N) p[sigma_j]`` in the protocol's output basis."""
    pv = p.expand() if isinstance(p, Spectrum) else np.asarray(p, dtype=float)
    if pv.shape != (proto.input_dim,):
        raise DimensionMismatch(f"input of dimension {len(pv)} for protocol on {proto.input_dim}")
    out = np.zeros_like(pv)
    for size, (_, sigma) in zip(proto.group_sizes, proto.mixture.terms):
        if size:
            out += (size / proto.ancilla_dim) * pv[sigma]
    return out


def simulate(proto: NoisyProtocol, p: Spectrum) -> Spectrum:
    return Spectrum.from_probabilities(simulate_vector(proto, p))


def measured_error(proto: NoisyProtocol, p: Spectrum, q: Spectrum) -> float:
    """l1 distance between the simulated output and ``q`` in the aligned eigenbasis."""
    return math.fsum(np.abs(simulate_vector(proto, p) - as_spectrum(q).expand()))


def pad_to_common_qubits(a: Spectrum, b: Spectrum) -> tuple[Spectrum, Spectrum]:
    """Tensor maximally mixed ancillas onto ``a`` and/or ``b`` until their dimensions agree."""
    a, b = as_spectrum(a), as_spectrum(b)
    common = math.lcm(a.dim, b.dim)
    if common != a.dim:
        a = tensor(a, Spectrum.maximally_mixed(common // a.dim))
    if common != b.dim:
        b = tensor(b, Spectrum.maximally_mixed(common // b.dim))
    return a, b


# -- primitive steps ----------------------------------------------------------


@dataclass(frozen=True)
class AddMaximallyMixed:
    dim: int

    @classmethod
    def qubits(cls, m: int) -> "AddMaximallyMixed":
        return cls(2**m)

    def out_dim(self, d: int) -> int:
        return d * self.dim

    def on_vector(self, v: np.ndarray) -> np.ndarray:
        return np.repeat(v / self.dim, self.dim)

    def on_matrix(self, rho: np.ndarray) -> np.ndarray:
        return np.kron(rho, np.eye(self.dim) / self.dim)


@dataclass(frozen=True)
class Permute:
    """Relabel the basis: ``new[x] = old[perm[x]]``."""

    perm: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        if not np.array_equal(np.sort(perm), np.arange(len(perm))):
            raise ValueError("not a permutation")
        perm.setflags(write=False)
        object.__setattr__(self, "perm", perm)

    def out_dim(self, d: int) -> int:
        if d != len(self.perm):
            raise DimensionMismatch(f"permutation on {len(self.perm)} applied to dimension {d}")
        return d

    def on_vector(self, v: np.ndarray) -> np.ndarray:
        return v[self.perm]

    def on_matrix(self, rho: np.ndarray) -> np.ndarray:
        return rho[np.ix_(self.perm, self.perm)]


@dataclass(frozen=True)
class TraceOutAncilla:
    dim: int

    @classmethod
    def qubits(cls, m: int) -> "TraceOutAncilla":
        return cls(2**m)

    def out_dim(self, d: int) -> int:
        if d % self.dim:
            raise DimensionMismatch(f"cannot trace a {self.dim}-dim factor out of dimension {d}")
        return d // self.dim

    def on_vector(self, v: np.ndarray) -> np.ndarray:
        return v.reshape(-1, self.dim).sum(axis=1)

    def on_matrix(self, rho: np.ndarray) -> np.ndarray:
        s = rho.shape[0] // self.dim
        return np.trace(rho.reshape(s, self.dim, s, self.dim), axis1=1, axis2=3)


@dataclass(frozen=True)
class NoChannel:
    input_dim: int
    steps: tuple

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        self.output_dim  # validates the dimension chain

    @property
    def output_dim(self) -> int:
        d = self.input_dim
        for step in self.steps:
            d = step.out_dim(d)
        return d

    def apply(self, p) -> np.ndarray:
        v = p.expand() if isinstance(p, Spectrum) else np.asarray(p, dtype=float)
        if v.shape != (self.input_dim,):
            raise DimensionMismatch(f"input of dimension {len(v)} for channel on {self.input_dim}")
        for step in self.steps:
            v = step.on_vector(v)
        return v

    def apply_density(self, m: DensityMatrix) -> DensityMatrix:
        if m.dim != self.input_dim:
            raise DimensionMismatch(f"input of dimension {m.dim} for channel on {self.input_dim}")
        rho = m.matrix
        for step in self.steps:
            rho = step.on_matrix(rho)
        return DensityMatrix(rho)


def random_channel(rng: np.random.Generator, input_dim: int, max_dim: int = 64, n_steps: int = 6) -> NoChannel:
    """Random composition of the three primitive steps, never exceeding ``max_dim``."""
    steps = []
    d = input_dim
    for _ in range(n_steps):
        choice = rng.integers(3)
        if choice == 0 and d * 2 <= max_dim:
            m = int(rng.integers(2, max_dim // d + 1))
            steps.append(AddMaximallyMixed(m))
            d *= m
        elif choice == 2:
            divisors = [f for f in range(2, d + 1) if d % f == 0]
            if divisors:
                f = int(rng.choice(divisors))
                steps.append(TraceOutAncilla(f))
                d //= f
                continue
            steps.append(Permute(rng.permutation(d)))
        else:
            steps.append(Permute(rng.permutation(d)))
    return NoChannel(input_dim, tuple(steps))


@dataclass(frozen=True)
class NoAudit:
    samples: int
    violations: int
    max_increase: float
    worst_index: int | None

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {"samples": self.samples, "violations": self.violations, "maxIncrease": self.max_increase}


def _info_of_vector(v: np.ndarray) -> float:
    return info(Spectrum.from_probabilities(np.clip(v, 0.0, None)))


def verify_no(chan: NoChannel, samples=None, *, n_samples: int = 1000, rng: np.random.Generator | None = None) -> NoAudit:
    """Check ``info(out) <= info(in) + 1e-9`` on every sample input."""
    if samples is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        samples = [rng.dirichlet(np.full(chan.input_dim, rng.uniform(0.1, 3.0))) for _ in range(n_samples)]
    violations = 0
    worst = -math.inf
    worst_idx = None
    count = 0
    for idx, s in enumerate(samples):
        v = s.expand() if isinstance(s, Spectrum) else np.asarray(s, dtype=float)
        increase = _info_of_vector(chan.apply(v)) - _info_of_vector(v)
        if increase > worst:
            worst, worst_idx = increase, idx
        if increase > INFO_SLACK:
            violations += 1
        count += 1
    return NoAudit(count, violations, worst, worst_idx if violations else None)
