import math
from pathlib import Path

import numpy as np
import pytest

from eventclock.clock_register import build_clock
from eventclock.event_statistics import EventSpec
from eventclock.history_state import build_history
from eventclock.quantum_core import (
    PAULI,
    HermitianOperator,
    HilbertLabel,
    Projector,
    StateVector,
    Units,
)

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"

QUBIT = HilbertLabel("system", 2)


def qubit_hamiltonian(name: str) -> HermitianOperator:
    return HermitianOperator(QUBIT, PAULI[name], Units.ENERGY)


def qubit_event(index: int, label: str = "event") -> EventSpec:
    basis = np.zeros((1, 2))
    basis[0, index] = 1.0
    return EventSpec(Projector.onto(QUBIT, basis), label)


def history(Hs, psi0, d, dt, tol=None):
    return build_history(build_clock(d, dt, tol), Hs, psi0, tol)


@pytest.fixture
def scenarios_dir() -> Path:
    return SCENARIOS


@pytest.fixture
def rabi():
    """sigma_x flopping from |0>, T_total = 4 pi on d = 32."""
    Hs = qubit_hamiltonian("x")
    psi0 = StateVector.basis(QUBIT, 0)
    return history(Hs, psi0, 32, 4.0 * math.pi / 32), qubit_event(1, "spin_flipped")
