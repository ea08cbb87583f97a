"""Small dense Hermitian layer: Jacobi eigensolver, trace distance, purification."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPositive
from .spectra import Spectrum

MAX_DIM = 64
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NEG_EIG_TOL = 1e-9
RANK_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


def jacobi_eigh(a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(w, v)`` with eigenvalues ``w`` in ascending order and unitary
    ``v`` whose columns are the eigenvectors, so that ``a = v @ diag(w) @ v^H``.
    Sweeps stop once the off-diagonal Frobenius norm drops below ``tol``.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise DimensionMismatch("matrix must be square")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # u = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (p, q) plane
                u = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = a[:, [p, q]] @ u
                a[:, [p, q]] = cols
                rows = u.conj().T @ a[[p, q], :]
                a[[p, q], :] = rows
                a[p, q] = a[q, p] = 0.0
                v[:, [p, q]] = v[:, [p, q]] @ u
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def jacobi_eigvalsh(a) -> np.ndarray:
    return jacobi_eigh(a)[0]


class DensityMatrix:
    """Validated Hermitian, unit-trace, positive semidefinite matrix (dim <= 64)."""

    __slots__ = ("_rho", "_eig")

    def __init__(self, entries):
        rho = np.array(entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatch("density matrix must be square")
        if rho.shape[0] > MAX_DIM:
            raise DimensionMismatch(f"dense matrices are capped at dim {MAX_DIM}")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise NotHermitian("matrix is not Hermitian within 1e-10")
        rho = 0.5 * (rho + rho.conj().T)
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
            raise NotPositive(f"trace {np.trace(rho).real!r} is not 1")
        eig = jacobi_eigh(rho)
        if eig[0][0] < -NEG_EIG_TOL:
            raise NotPositive(f"smallest eigenvalue {eig[0][0]!r} below -1e-9")
        rho.setflags(write=False)
        self._rho = rho
        self._eig = eig

    @classmethod
    def from_diagonal(cls, probs) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probs, dtype=float)))

    @classmethod
    def from_pure(cls, ket) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex)
        ket = ket / np.linalg.norm(ket)
        return cls(np.outer(ket, ket.conj()))

    @classmethod
    def from_json(cls, obj: dict) -> "DensityMatrix":
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != (obj["dim"], obj["dim"]) or im.shape != re.shape:
            raise DimensionMismatch("'re'/'im' must be dim x dim")
        return cls(re + 1j * im)

    def to_json(self) -> dict:
        return {"dim": self.dim, "re": self._rho.real.tolist(), "im": self._rho.imag.tolist()}

    @property
    def dim(self) -> int:
        return self._rho.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._rho

    def eigh(self):
        return self._eig

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def _clipped_eigenvalues(m: DensityMatrix) -> np.ndarray:
    w = np.clip(m.eigh()[0], 0.0, 1.0)
    return w / w.sum()


def eigen_spectrum(m: DensityMatrix) -> Spectrum:
    """Spectrum of ``m``: clipped to [0, 1], renormalised, grouped, sorted."""
    return Spectrum.from_probabilities(_clipped_eigenvalues(m))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Trace norm of ``a - b``, in [0, 2]."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    return math.fsum(np.abs(jacobi_eigvalsh(a.matrix - b.matrix)))


def von_neumann_entropy(m: DensityMatrix) -> float:
    from .spectra import entropy

    return entropy(eigen_spectrum(m))


@dataclass(frozen=True)
class Purification:
    system_qubits: int
    ancilla_qubits: int
    amplitudes: np.ndarray  # index = system * 2**ancilla_qubits + ancilla
    system_dim: int

    def reduced_state(self) -> np.ndarray:
        psi = self.amplitudes.reshape(self.system_dim, 2**self.ancilla_qubits)
        return psi @ psi.conj().T


def minimal_purification(m: DensityMatrix) -> Purification:
    """Pure joint state whose system marginal is ``m``, on ``ceil(log2 rank)`` ancilla qubits."""
    w, v = m.eigh()
    if w[0] < -NEG_EIG_TOL:
        raise NotPositive(f"smallest eigenvalue {w[0]!r} below -1e-9")
    keep = np.nonzero(w > RANK_TOL)[0][::-1]
    rank = len(keep)
    anc = (rank - 1).bit_length()
    psi = np.zeros((m.dim, 2**anc), dtype=complex)
    for slot, i in enumerate(keep):
        psi[:, slot] = math.sqrt(w[i]) * v[:, i]
    psi /= np.linalg.norm(psi)
    return Purification(
        system_qubits=math.ceil(math.log2(m.dim)) if m.dim > 1 else 0,
        ancilla_qubits=anc,
        amplitudes=psi.reshape(-1),
        system_dim=m.dim,
    )
