"""
Quantum Core Module
Finite-dimensional states, Hermitian operators, projectors, tensor products,
expectation values and spectral time evolution (hbar = 1).
"""

import logging
from dataclasses import InitVar, dataclass
from enum import Enum
from functools import cached_property
from typing import Union

import numpy as np
import scipy.linalg as la

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ContractError, NumericalError, ResourceError

logger = logging.getLogger(__name__)

PAULI = {
    "i": np.eye(2, dtype=np.complex128),
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


class Units(str, Enum):
    ENERGY = "energy"
    TIME = "time"
    DIMENSIONLESS = "dimensionless"


@dataclass(frozen=True)
class HilbertLabel:
    name: str
    dimension: int

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ContractError(
                f"Hilbert space '{self.name}' needs a positive integer dimension, "
                f"got {self.dimension}"
            )


def product_label(a: HilbertLabel, b: HilbertLabel) -> HilbertLabel:
    """Label of a ⊗ b. Clock-major: the index of `a` varies slowest."""
    return HilbertLabel(f"{a.name}*{b.name}", a.dimension * b.dimension)


def hermitize(matrix: np.ndarray) -> np.ndarray:
    """Exactly Hermitian part of a matrix."""
    return 0.5 * (matrix + matrix.conj().T)


def _frozen_array(values, dtype=np.complex128) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitude vector over a labeled Hilbert space."""

    space: HilbertLabel
    amplitudes: np.ndarray
    tol: InitVar[Tolerances | None] = None

    def __post_init__(self, tol):
        tol = tol or DEFAULT_TOLERANCES
        amps = _frozen_array(np.ravel(self.amplitudes))
        if amps.shape != (self.space.dimension,):
            raise ContractError(
                f"state on '{self.space.name}' needs {self.space.dimension} "
                f"amplitudes, got {amps.size}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > tol.norm:
            raise ContractError(f"state norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalize(cls, space: HilbertLabel, raw) -> "StateVector":
        """Build a state from raw (unnormalized) amplitudes."""
        raw = np.asarray(raw, dtype=np.complex128).ravel()
        norm = np.linalg.norm(raw)
        if norm == 0 or not np.isfinite(norm):
            raise ContractError(f"cannot normalize a vector of norm {norm}")
        return cls(space, raw / norm)

    @classmethod
    def basis(cls, space: HilbertLabel, index: int) -> "StateVector":
        amps = np.zeros(space.dimension, dtype=np.complex128)
        amps[index] = 1.0
        return cls(space, amps)

    @property
    def dimension(self) -> int:
        return self.space.dimension


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense Hermitian matrix with physical units."""

    space: HilbertLabel
    matrix: np.ndarray
    units: Units = Units.DIMENSIONLESS
    tol: InitVar[Tolerances | None] = None

    def __post_init__(self, tol):
        tol = tol or DEFAULT_TOLERANCES
        mat = _frozen_array(self.matrix)
        n = self.space.dimension
        if mat.shape != (n, n):
            raise ContractError(
                f"operator on '{self.space.name}' must be {n}x{n}, got {mat.shape}"
            )
        if not np.all(np.isfinite(mat)):
            raise ContractError("operator has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
        deviation = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
        if deviation > tol.hermitian * scale:
            raise ContractError(
                f"operator is not Hermitian (max |M - M^dagger| = {deviation:.3e})"
            )
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "units", Units(self.units))

    @classmethod
    def identity(cls, space: HilbertLabel, units: Units = Units.DIMENSIONLESS):
        return cls(space, np.eye(space.dimension, dtype=np.complex128), units)

    @classmethod
    def zeros(cls, space: HilbertLabel, units: Units = Units.DIMENSIONLESS):
        n = space.dimension
        return cls(space, np.zeros((n, n), dtype=np.complex128), units)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and eigenvectors, computed once per operator."""
        try:
            evals, evecs = la.eigh(self.matrix)
        except (la.LinAlgError, ValueError) as e:
            raise NumericalError(f"eigendecomposition failed: {e}") from e
        if not (np.all(np.isfinite(evals)) and np.all(np.isfinite(evecs))):
            raise NumericalError("eigendecomposition produced non-finite values")
        return evals, evecs

    def commutator_norm(self, other: "HermitianOperator") -> float:
        """max-norm of [self, other]."""
        a, b = self.matrix, other.matrix
        return float(np.max(np.abs(a @ b - b @ a)))


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector Π = Π² = Π^dagger."""

    operator: HermitianOperator
    tol: InitVar[Tolerances | None] = None

    def __post_init__(self, tol):
        tol = tol or DEFAULT_TOLERANCES
        mat = self.operator.matrix
        idem = float(np.max(np.abs(mat @ mat - mat)))
        if idem > tol.projector:
            raise ContractError(f"projector is not idempotent (|P^2 - P| = {idem:.3e})")
        evals = la.eigvalsh(mat)
        off = np.minimum(np.abs(evals), np.abs(evals - 1.0))
        if np.any(off > tol.projector):
            raise ContractError("projector eigenvalues must be 0 or 1")

    @classmethod
    def from_matrix(cls, space: HilbertLabel, matrix, tol: Tolerances | None = None):
        return cls(HermitianOperator(space, matrix, Units.DIMENSIONLESS, tol), tol)

    @classmethod
    def onto(cls, space: HilbertLabel, vectors) -> "Projector":
        """Projector onto the span of the given vectors (rows)."""
        vecs = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
        if vecs.shape[1] != space.dimension:
            raise ContractError("spanning vectors do not match the space dimension")
        q = la.orth(vecs.T)
        return cls.from_matrix(space, hermitize(q @ q.conj().T))

    @classmethod
    def identity(cls, space: HilbertLabel) -> "Projector":
        return cls(HermitianOperator.identity(space))

    @classmethod
    def zero(cls, space: HilbertLabel) -> "Projector":
        return cls(HermitianOperator.zeros(space))

    @property
    def space(self) -> HilbertLabel:
        return self.operator.space

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.matrix).real)))


Operand = Union[StateVector, HermitianOperator, Projector]


def _product_units(a: Units, b: Units) -> Units:
    if a == Units.DIMENSIONLESS:
        return b
    if b == Units.DIMENSIONLESS:
        return a
    raise ContractError(f"cannot form the product of {a.value} and {b.value} operators")


def tensor_product(a: Operand, b: Operand, tol: Tolerances | None = None):
    """
    Kronecker product on the joint space, clock-major ordering.

    Joint index of (i, j) is i * dim(b) + j.
    """
    tol = tol or DEFAULT_TOLERANCES
    if isinstance(a, Projector):
        a = a.operator
    if isinstance(b, Projector):
        b = b.operator

    joint = a.space.dimension * b.space.dimension
    if joint > tol.max_joint_dim:
        raise ResourceError(
            f"joint dimension {joint} exceeds the cap {tol.max_joint_dim}"
        )
    space = product_label(a.space, b.space)

    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(space, np.kron(a.amplitudes, b.amplitudes), tol)
    if isinstance(a, HermitianOperator) and isinstance(b, HermitianOperator):
        return HermitianOperator(
            space, np.kron(a.matrix, b.matrix), _product_units(a.units, b.units), tol
        )
    raise ContractError(
        f"tensor_product needs two states or two operators, got "
        f"{type(a).__name__} and {type(b).__name__}"
    )


def _check_space(psi: StateVector, op: HermitianOperator):
    if psi.space != op.space:
        raise ContractError(
            f"state lives on '{psi.space.name}' ({psi.space.dimension}) but operator "
            f"on '{op.space.name}' ({op.space.dimension})"
        )


def evolve_many(psi0: StateVector, H: HermitianOperator, times) -> np.ndarray:
    """
    Evolve psi0 under H to every time in `times`.

    Returns an array of shape (len(times), dim); row k is exp(-i H t_k)|psi0>.
    The spectrum of H is computed once and reused.
    """
    if H.units != Units.ENERGY:
        raise ContractError(f"evolution needs an energy operator, got {H.units.value}")
    _check_space(psi0, H)

    evals, evecs = H.spectrum
    coeffs = evecs.conj().T @ psi0.amplitudes
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    phases = np.exp(-1j * np.outer(times, evals))
    slices = (phases * coeffs) @ evecs.T

    norms = np.linalg.norm(slices, axis=1)
    if not np.all(np.isfinite(norms)) or np.any(norms == 0):
        raise NumericalError("evolution produced a degenerate state")
    return slices / norms[:, None]


def evolve(psi0: StateVector, H: HermitianOperator, t: float) -> StateVector:
    """|psi(t)> = exp(-i H t)|psi0> by spectral decomposition."""
    return StateVector(psi0.space, evolve_many(psi0, H, [t])[0])


def expectation(
    psi: StateVector, A: HermitianOperator, tol: Tolerances | None = None
) -> float:
    """Re <psi|A|psi>, refusing results with a significant imaginary part."""
    tol = tol or DEFAULT_TOLERANCES
    _check_space(psi, A)
    value = np.vdot(psi.amplitudes, A.matrix @ psi.amplitudes)
    if abs(value.imag) > tol.expectation_imag * (1.0 + A.max_abs):
        raise NumericalError(
            f"expectation value has imaginary residual {value.imag:.3e}"
        )
    return float(value.real)


def variance(psi: StateVector, A: HermitianOperator, tol: Tolerances | None = None) -> float:
    """<A^2> - <A>^2, clamped at zero."""
    mean = expectation(psi, A, tol)
    second = float(np.linalg.norm(A.matrix @ psi.amplitudes) ** 2)
    return max(second - mean * mean, 0.0)
