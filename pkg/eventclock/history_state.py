"""
History State Module
The timeless clock-system state |Psi>> = (1/sqrt(d)) sum_k |t_k>|psi(t_k)> and
its constraint and energy-equality diagnostics.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .clock_register import ClockRegister
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ContractError, ResourceError
from .quantum_core import (
    HermitianOperator,
    HilbertLabel,
    StateVector,
    evolve_many,
    product_label,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HistoryState:
    clock: ClockRegister
    system: HilbertLabel
    psi: StateVector
    Hs: HermitianOperator
    psi0: StateVector

    @property
    def space(self) -> HilbertLabel:
        return self.psi.space

    @property
    def joint(self) -> np.ndarray:
        """Amplitudes as a (d, dim_s) array; row k is |psi(t_k)>/sqrt(d)."""
        return self.psi.amplitudes.reshape(self.clock.d, self.system.dimension)

    @cached_property
    def trajectory(self) -> np.ndarray:
        """Row k is |psi(t_k)>."""
        return self.joint * np.sqrt(self.clock.d)

    def slice(self, k: int) -> StateVector:
        """Project onto clock state |t_k> and renormalize."""
        return StateVector.normalize(self.system, self.joint[k])


def build_history(
    clock: ClockRegister,
    Hs: HermitianOperator,
    psi0: StateVector,
    tol: Tolerances | None = None,
) -> HistoryState:
    """
    Assemble |Psi>> from Schrodinger evolution on the clock grid.

    The measure dt/T becomes 1/d, so |Psi>> is normalized whenever every
    |psi(t_k)> is.
    """
    tol = tol or DEFAULT_TOLERANCES
    if Hs.space != psi0.space:
        raise ContractError(
            f"Hamiltonian lives on '{Hs.space.name}' but the initial state on "
            f"'{psi0.space.name}'"
        )
    joint_dim = clock.d * psi0.dimension
    if joint_dim > tol.max_joint_dim:
        raise ResourceError(
            f"joint dimension {joint_dim} exceeds the cap {tol.max_joint_dim}"
        )

    slices = evolve_many(psi0, Hs, clock.times)
    space = product_label(clock.space, psi0.space)
    psi = StateVector(space, slices.reshape(-1) / np.sqrt(clock.d), tol)
    logger.debug("built history state on %s (dim %d)", space.name, joint_dim)
    return HistoryState(clock=clock, system=psi0.space, psi=psi, Hs=Hs, psi0=psi0)


def constraint_residual(h: HistoryState) -> float:
    """|| (Hc (x) 1 + 1 (x) Hs) |Psi>> ||; converges to zero only in the continuum."""
    m = h.joint
    residual = h.clock.apply_energy(m, axis=0) + m @ h.Hs.matrix.T
    return float(np.linalg.norm(residual))


@dataclass(frozen=True)
class EnergyEquality:
    mean_sys: float
    mean_clock: float
    std_sys: float
    std_clock: float

    @property
    def mean_discrepancy(self) -> float:
        """|<Hs> + <Hc>|, zero when the constraint holds."""
        return abs(self.mean_sys + self.mean_clock)

    @property
    def std_discrepancy(self) -> float:
        return abs(self.std_sys - self.std_clock)

    def to_dict(self) -> dict:
        return {
            "mean_sys": self.mean_sys,
            "mean_clock": self.mean_clock,
            "std_sys": self.std_sys,
            "std_clock": self.std_clock,
            "mean_discrepancy": self.mean_discrepancy,
            "std_discrepancy": self.std_discrepancy,
        }


def _moments(vec: np.ndarray, applied: np.ndarray) -> tuple[float, float]:
    mean = float(np.vdot(vec, applied).real)
    second = float(np.vdot(applied, applied).real)
    return mean, np.sqrt(max(second - mean * mean, 0.0))


def energy_equality_check(h: HistoryState) -> EnergyEquality:
    """Moments of 1 (x) Hs and Hc (x) 1 on |Psi>>."""
    m = h.joint
    mean_sys, std_sys = _moments(m, m @ h.Hs.matrix.T)
    mean_clock, std_clock = _moments(m, h.clock.apply_energy(m, axis=0))
    return EnergyEquality(
        mean_sys=mean_sys,
        mean_clock=mean_clock,
        std_sys=float(std_sys),
        std_clock=float(std_clock),
    )
