"""The one-parameter two-qubit state family and related transforms.

Basis conventions (fixed globally):
  * two-qubit basis order |00>, |01>, |10>, |11>;
  * the family rho0(x) has (4,4) entry 1-x and middle coherence 1-3x/2;
  * the probe qubit is appended as the LAST tensor factor with basis
    order (|e>, |g>), i.e. the first diagonal entry of a probe state is
    the excited-state population.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .qcore import Array, DensityMatrix, HilbertSpace, kron, partial_trace

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

#: zero-pattern tolerance accepted by extract_xstate
XSTATE_PATTERN_TOL = 1e-8


class ProbePrep(enum.Enum):
    """Initial preparation of the probe qubit."""

    GROUND = "ground"
    EXCITED = "excited"

    @property
    def matrix(self) -> Array:
        # basis order (|e>, |g>)
        if self is ProbePrep.EXCITED:
            return np.diag([1.0, 0.0]).astype(complex)
        return np.diag([0.0, 1.0]).astype(complex)


def two_qubit_space(a: str = "A", b: str = "B") -> HilbertSpace:
    return HilbertSpace((2, 2), (a, b))


def one_param_density(x: float) -> DensityMatrix:
    """Density matrix of the family at parameter x in [1/2, 1].

    Diagonal (0, x/2, x/2, 1-x) with real coherence 1-3x/2 between
    |01> and |10>.  In the Bell-diagonal picture this is weight 1-x on
    (|01>+|10>)/sqrt2, weight 2x-1 on (|01>-|10>)/sqrt2 and weight 1-x
    on |11>.
    """
    x = float(x)
    if not 0.5 <= x <= 1.0:
        raise ValueError("x out of family domain")
    c = 1.0 - 1.5 * x
    mat = np.array(
        [
            [0.0, 0.0, 0.0, 0.0],
            [0.0, x / 2.0, c, 0.0],
            [0.0, c, x / 2.0, 0.0],
            [0.0, 0.0, 0.0, 1.0 - x],
        ],
        dtype=complex,
    )
    return DensityMatrix(two_qubit_space(), mat)


def corner_swap(rho: DensityMatrix) -> DensityMatrix:
    """Conjugation by sigma_x (x) sigma_x.

    On the family this exchanges the |00> and |11> populations while
    leaving the middle block untouched; it is a local unitary, so every
    correlation measure is preserved.
    """
    if rho.dim != 4:
        raise ValueError("two-qubit state required")
    xx = kron(SIGMA_X, SIGMA_X)
    return DensityMatrix(rho.space, xx @ rho.mat @ xx)


def join_with_probe(rho_ab: DensityMatrix, prep: ProbePrep) -> DensityMatrix:
    """Attach a freshly prepared probe qubit as the last tensor factor."""
    labels = rho_ab.space.labels
    probe_label = "C"
    k = 2
    while probe_label in labels:
        probe_label = f"C{k}"
        k += 1
    space = HilbertSpace(rho_ab.space.dims + (2,), labels + (probe_label,))
    return DensityMatrix(space, kron(rho_ab.mat, prep.matrix))


def discard_probe(rho: DensityMatrix) -> DensityMatrix:
    """Trace out the last factor (remove the probe)."""
    return partial_trace(rho, range(rho.space.nfactors - 1))


@dataclass(frozen=True)
class XState:
    """Real-entry X-state restricted to the pattern with zero corner coherence.

    Parameters are the four populations and the single real coherence
    between |01> and |10>.
    """

    r11: float
    r22: float
    r33: float
    r44: float
    r23: float

    def __post_init__(self):
        pops = (self.r11, self.r22, self.r33, self.r44)
        if abs(sum(pops) - 1.0) > 1e-10:
            raise ValueError("populations must sum to one")
        if any(p < -1e-12 for p in pops):
            raise ValueError("negative population")
        if self.r23 ** 2 > self.r22 * self.r33 + 1e-12:
            raise ValueError("coherence violates positivity")

    def to_density(self) -> DensityMatrix:
        mat = np.array(
            [
                [self.r11, 0.0, 0.0, 0.0],
                [0.0, self.r22, self.r23, 0.0],
                [0.0, self.r23, self.r33, 0.0],
                [0.0, 0.0, 0.0, self.r44],
            ],
            dtype=complex,
        )
        return DensityMatrix(two_qubit_space(), mat)


def extract_xstate(rho: DensityMatrix) -> XState:
    """Read off the five real X-state parameters, validating the zero pattern."""
    if rho.dim != 4:
        raise ValueError("two-qubit state required")
    m = rho.mat
    pattern = np.zeros((4, 4), dtype=bool)
    for i in range(4):
        pattern[i, i] = True
    pattern[1, 2] = pattern[2, 1] = True
    if np.max(np.abs(m[~pattern])) > XSTATE_PATTERN_TOL:
        raise ValueError("not an X-state of the required form")
    if abs(m[1, 2].imag) > XSTATE_PATTERN_TOL:
        raise ValueError("not an X-state of the required form")
    return XState(
        r11=float(m[0, 0].real),
        r22=float(m[1, 1].real),
        r33=float(m[2, 2].real),
        r44=float(m[3, 3].real),
        r23=float(m[1, 2].real),
    )
