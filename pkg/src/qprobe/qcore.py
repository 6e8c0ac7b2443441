"""Dense complex-matrix algebra and Hilbert-space bookkeeping.

Everything is ordinary dense numpy on complex128; matrices stay small
(dimension <= 72 for the largest model) so spectral decompositions are
used freely.  All containers are frozen dataclasses holding read-only
arrays, so values are safe to share between threads.

Conventions:
    hbar = 1; the coupling g = 1 is the default energy unit and times
    are in units of 1/g.  Entropies are in bits (base-2 logarithms).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Array = np.ndarray

# Numerical tolerances.  The eigenvalue floor and entropy clip sit well
# above round-off at these dimensions and far below any physical value.
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIG_FLOOR = -1e-8
ENTROPY_CLIP = 1e-12
#: max Hermiticity deviation accepted by hermitian_eigen before symmetrizing
EIGH_INPUT_TOL = 1e-8


def _as_matrix(m) -> Array:
    """Return the raw complex matrix of a DensityMatrix or array-like."""
    if isinstance(m, DensityMatrix):
        return m.mat
    return np.asarray(m, dtype=complex)


def _frozen_array(m) -> Array:
    a = np.array(m, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor-factor structure: one dimension and label per subsystem."""

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError("factor dimensions must be positive")
        if len(self.labels) != len(self.dims):
            raise ValueError("one label per factor required")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")

    @property
    def dim(self) -> int:
        """Total dimension (product of the factor dimensions)."""
        return int(np.prod(self.dims))

    @property
    def nfactors(self) -> int:
        return len(self.dims)

    def subspace(self, keep: Iterable[int]) -> "HilbertSpace":
        """Space spanned by the kept factors, original order preserved."""
        idx = sorted(set(int(k) for k in keep))
        if not idx or any(k < 0 or k >= self.nfactors for k in idx):
            raise ValueError("bad subsystem")
        return HilbertSpace(
            tuple(self.dims[k] for k in idx), tuple(self.labels[k] for k in idx)
        )


@dataclass(frozen=True)
class DensityMatrix:
    """Positive, unit-trace operator on a declared tensor-factor space.

    Construction validates Hermiticity (1e-10), trace (1e-10) and
    positivity (smallest eigenvalue >= -1e-8); invalid states raise.
    """

    space: HilbertSpace
    mat: Array

    def __post_init__(self):
        m = np.array(self.mat, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match space dim {d}")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("non-finite entries")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValueError("not Hermitian")
        if abs(np.trace(m).real - 1.0) > TRACE_TOL or abs(np.trace(m).imag) > TRACE_TOL:
            raise ValueError("trace differs from one")
        if np.linalg.eigvalsh(m)[0] < EIG_FLOOR:
            raise ValueError("not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.space.dim


def kron(a, b) -> Array:
    """Kronecker product of two operators (dimensions multiply)."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def kron_all(*ops) -> Array:
    """Left-to-right Kronecker product of several operators."""
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, _as_matrix(op))
    return out


def partial_trace_mat(mat: Array, dims: Sequence[int], keep: Iterable[int]) -> Array:
    """Partial trace of a raw matrix over the factors not in ``keep``."""
    dims = [int(d) for d in dims]
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep or any(k < 0 or k >= n for k in keep):
        raise ValueError("bad subsystem")
    r = np.asarray(mat, dtype=complex).reshape(dims + dims)
    cur = list(range(n))
    for d in sorted(set(range(n)) - set(keep), reverse=True):
        pos = cur.index(d)
        r = np.trace(r, axis1=pos, axis2=pos + len(cur))
        cur.pop(pos)
    dk = int(np.prod([dims[k] for k in keep]))
    return r.reshape(dk, dk)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the kept factors, order preserved."""
    sub = rho.space.subspace(keep)
    return DensityMatrix(sub, partial_trace_mat(rho.mat, rho.space.dims, keep))


def hermitian_eigen(m) -> tuple[Array, Array]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    The input is symmetrized to (m + m^dag)/2 after checking its
    Hermiticity deviation stays below 1e-8.
    """
    a = _as_matrix(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(a - a.conj().T)) > EIGH_INPUT_TOL:
        raise ValueError("not Hermitian")
    a = 0.5 * (a + a.conj().T)
    vals, vecs = np.linalg.eigh(a)
    return vals, vecs


def psd_sqrt_mat(m) -> Array:
    """Hermitian square root of a PSD matrix; eigenvalues in [-1e-8, 0) clip to 0."""
    vals, vecs = hermitian_eigen(m)
    if vals[0] < EIG_FLOOR:
        raise ValueError("not PSD")
    root = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * root) @ vecs.conj().T


def psd_sqrt(rho: DensityMatrix) -> Array:
    """Positive square root of a density matrix (Hermitian, squares back to it)."""
    return psd_sqrt_mat(rho.mat)


@dataclass(frozen=True)
class SpectralPropagator:
    """exp(-iHt) realized through the spectral decomposition of H.

    Unitarity is exact by construction, so conjugation preserves trace,
    Hermiticity and the full spectrum of any state for any t.
    """

    eigenvalues: Array
    eigenvectors: Array

    @classmethod
    def from_hamiltonian(cls, h) -> "SpectralPropagator":
        vals, vecs = hermitian_eigen(h)
        vals = np.array(vals, dtype=float)
        vals.setflags(write=False)
        return cls(vals, _frozen_array(vecs))

    def unitary(self, t: float) -> Array:
        phases = np.exp(-1j * self.eigenvalues * t)
        return (self.eigenvectors * phases) @ self.eigenvectors.conj().T

    def apply_mat(self, mat: Array, t: float) -> Array:
        u = self.unitary(t)
        return u @ mat @ u.conj().T

    def apply(self, rho: DensityMatrix, t: float) -> DensityMatrix:
        return DensityMatrix(rho.space, self.apply_mat(rho.mat, t))


def propagate(rho: DensityMatrix, h, t: float) -> DensityMatrix:
    """Unitary conjugation rho -> exp(-iHt) rho exp(+iHt) for Hermitian h."""
    hm = _as_matrix(h)
    if hm.shape != rho.mat.shape:
        raise ValueError("dimension mismatch between state and Hamiltonian")
    return SpectralPropagator.from_hamiltonian(hm).apply(rho, t)


def entropy_of_spectrum(values) -> float:
    """Base-2 von Neumann entropy of a probability spectrum.

    Values below 1e-12 are treated as exact zeros (0 log 0 := 0).
    """
    v = np.asarray(values, dtype=float)
    v = v[v > ENTROPY_CLIP]
    if v.size == 0:
        return 0.0
    return float(-np.sum(v * np.log2(v)))


def entropy_bits(rho) -> float:
    """Von Neumann entropy in bits of a density matrix."""
    return entropy_of_spectrum(np.linalg.eigvalsh(_as_matrix(rho)))


def trace_distance(a, b) -> float:
    """(1/2) * trace norm of the difference of two states."""
    diff = _as_matrix(a) - _as_matrix(b)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def fidelity(a, b) -> float:
    """Uhlmann state fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2."""
    ra = psd_sqrt_mat(_as_matrix(a))
    inner = ra @ _as_matrix(b) @ ra
    vals = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(vals, 0.0, None))) ** 2)
