"""
Clock Register Module
Finite-dimensional quantum clock: time operator Tc on a centered grid and its
Fourier-conjugate energy Hc, plus diagnostics for [Tc, Hc] = i.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ContractError
from .quantum_core import HermitianOperator, HilbertLabel, StateVector, Units, hermitize

logger = logging.getLogger(__name__)

CLOCK_SPACE_NAME = "clock"


@dataclass(frozen=True, eq=False)
class ClockRegister:
    """
    Clock of dimension d on the grid t_k = (k - d/2) dt, k = 0..d-1.

    Hc = F diag(p) F^dagger with F[k, m] = exp(i p_m t_k) / sqrt(d) and
    p_m = 2 pi m / (d dt), m = -d/2 .. d/2 - 1. The unpaired Nyquist value
    -pi/dt is kept.
    """

    d: int
    dt: float
    times: np.ndarray
    frequencies: np.ndarray
    Tc: HermitianOperator
    Hc: HermitianOperator

    @property
    def T_total(self) -> float:
        return self.d * self.dt

    @property
    def space(self) -> HilbertLabel:
        return self.Tc.space

    @property
    def energy_resolution(self) -> float:
        """Spacing of the clock energy grid, 2 pi / T_total."""
        return 2.0 * np.pi / self.T_total

    @cached_property
    def _fft_frequencies(self) -> np.ndarray:
        # Same values as `frequencies`, in FFT order
        return 2.0 * np.pi * scipy.fft.fftfreq(self.d, self.dt)

    def apply_energy(self, values: np.ndarray, axis: int = 0) -> np.ndarray:
        """Apply Hc along the clock axis of `values` (spectral derivative -i d/dt)."""
        values = np.asarray(values, dtype=np.complex128)
        shape = [1] * values.ndim
        shape[axis] = self.d
        freqs = self._fft_frequencies.reshape(shape)
        return scipy.fft.ifft(freqs * scipy.fft.fft(values, axis=axis), axis=axis)

    def apply_time(self, values: np.ndarray, axis: int = 0) -> np.ndarray:
        """Apply Tc along the clock axis of `values`."""
        values = np.asarray(values, dtype=np.complex128)
        shape = [1] * values.ndim
        shape[axis] = self.d
        return self.times.reshape(shape) * values

    def fourier_matrix(self) -> np.ndarray:
        """Unitary F with F[k, m] = exp(i p_m t_k) / sqrt(d)."""
        return np.exp(1j * np.outer(self.times, self.frequencies)) / np.sqrt(self.d)


def build_clock(d: int, dt: float, tol: Tolerances | None = None) -> ClockRegister:
    """Construct the clock register for dimension d and grid spacing dt."""
    tol = tol or DEFAULT_TOLERANCES
    if int(d) != d or d < 4:
        raise ContractError(f"clock dimension must be an integer >= 4, got {d}")
    d = int(d)
    if d % 2:
        raise ContractError(
            f"clock dimension must be even for the centered transform grid, got {d}"
        )
    if not np.isfinite(dt) or dt <= 0:
        raise ContractError(f"clock spacing must be positive, got {dt}")
    dt = float(dt)

    space = HilbertLabel(CLOCK_SPACE_NAME, d)
    times = (np.arange(d) - d // 2) * dt
    frequencies = 2.0 * np.pi * np.arange(-d // 2, d // 2) / (d * dt)

    # Columns of Hc are Hc|t_j>, computed with the same kernel as apply_energy
    fft_freqs = 2.0 * np.pi * scipy.fft.fftfreq(d, dt)
    hc = scipy.fft.ifft(fft_freqs[:, None] * scipy.fft.fft(np.eye(d), axis=0), axis=0)

    Tc = HermitianOperator(space, np.diag(times).astype(np.complex128), Units.TIME, tol)
    Hc = HermitianOperator(space, hermitize(hc), Units.ENERGY, tol)

    times.setflags(write=False)
    frequencies.setflags(write=False)
    logger.debug("built clock d=%d dt=%g T_total=%g", d, dt, d * dt)
    return ClockRegister(d=d, dt=dt, times=times, frequencies=frequencies, Tc=Tc, Hc=Hc)


def gaussian_probe(clock: ClockRegister, width: float, center: float = 0.0) -> StateVector:
    """Clock state whose |amplitude|^2 is a Gaussian of standard deviation `width`."""
    if width <= 0:
        raise ContractError(f"probe width must be positive, got {width}")
    amps = np.exp(-((clock.times - center) ** 2) / (4.0 * width**2))
    return StateVector.normalize(clock.space, amps)


def commutator_residual(clock: ClockRegister, probe: StateVector) -> float:
    """
    || ([Tc, Hc] - i) |probe> ||.

    Small for probes supported away from the grid edges; states touching the
    edges see the wrap-around of the periodic transform.
    """
    if probe.space != clock.space:
        raise ContractError(
            f"probe lives on '{probe.space.name}' ({probe.dimension}), "
            f"expected the clock space ({clock.d})"
        )
    v = probe.amplitudes
    t_h = clock.apply_time(clock.apply_energy(v))
    h_t = clock.apply_energy(clock.apply_time(v))
    return float(np.linalg.norm(t_h - h_t - 1j * v))
