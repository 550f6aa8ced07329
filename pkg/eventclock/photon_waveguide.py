"""
Photon Waveguide Module
Single photon in a waveguide: spectral amplitudes on a uniform frequency
grid, arrival-time distributions at a screen, and time-bandwidth products.

Works directly on grids; no clock register is involved since the window
length cancels out of p(t|Π) for an arrival event.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ContractError, EventNeverHappens
from .event_statistics import time_statistics

logger = logging.getLogger(__name__)

BOUND = 0.5


def omega_grid(N: int, d_omega: float, omega_min: float = 0.0) -> np.ndarray:
    """omega_n = omega_min + n * d_omega, n = 0..N-1."""
    if int(N) != N or N < 2:
        raise ContractError(f"frequency grid needs N >= 2 points, got {N}")
    if not d_omega > 0:
        raise ContractError(f"frequency spacing must be positive, got {d_omega}")
    return omega_min + np.arange(int(N)) * d_omega


@dataclass(frozen=True, eq=False)
class SpectralAmplitude:
    """phi(omega) sampled on a uniform grid, normalized as sum |phi|^2 d_omega / 2pi = 1."""

    omega_grid: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        grid = np.array(self.omega_grid, dtype=np.float64)
        phi = np.array(self.phi, dtype=np.complex128)
        if grid.ndim != 1 or grid.size < 2 or phi.shape != grid.shape:
            raise ContractError("spectral amplitude and grid must be 1-d of equal size")
        steps = np.diff(grid)
        if steps[0] <= 0 or np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, steps[0]):
            raise ContractError("frequency grid must be uniform and increasing")
        norm = float(np.sum(np.abs(phi) ** 2) * steps[0] / (2.0 * np.pi))
        if abs(norm - 1.0) > 1e-10:
            raise ContractError(f"spectral amplitude has norm {norm!r}, expected 1")
        grid.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "omega_grid", grid)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def normalize(cls, grid, raw) -> "SpectralAmplitude":
        grid = np.asarray(grid, dtype=np.float64)
        raw = np.asarray(raw, dtype=np.complex128)
        d_omega = grid[1] - grid[0]
        norm = math.sqrt(float(np.sum(np.abs(raw) ** 2)) * d_omega / (2.0 * np.pi))
        if norm == 0 or not math.isfinite(norm):
            raise ContractError("spectral amplitude vanishes on the grid")
        return cls(grid, raw / norm)

    @property
    def N(self) -> int:
        return self.omega_grid.size

    @property
    def d_omega(self) -> float:
        return float(self.omega_grid[1] - self.omega_grid[0])

    @property
    def omega_min(self) -> float:
        return float(self.omega_grid[0])

    @property
    def dt(self) -> float:
        """Spacing of the dual time grid, 2 pi / (N d_omega)."""
        return 2.0 * np.pi / (self.N * self.d_omega)

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) * self.dt

    @property
    def weights(self) -> np.ndarray:
        """|phi_n|^2 d_omega / 2pi, a probability vector over the grid."""
        return np.abs(self.phi) ** 2 * self.d_omega / (2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class TimeAmplitude:
    times: np.ndarray
    values: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def probability(self) -> np.ndarray:
        return np.abs(self.values) ** 2 * self.dt


@dataclass(frozen=True)
class ArrivalEvent:
    """Detection at a screen at z0; the photon arrives at t0 = z0 / c."""

    z0: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        if self.c != 1.0:
            raise ContractError("propagation speed is fixed to c = 1")

    @property
    def t0(self) -> float:
        return self.z0 / self.c


def gaussian_spectrum(
    omega0: float,
    sigma: float,
    N: int = 4096,
    d_omega: float = 0.01,
    omega_min: float = 0.0,
    chirp: float = 0.0,
) -> SpectralAmplitude:
    """
    exp(-(w - w0)^2 / (4 sigma^2)) * exp(i chirp (w - w0)^2).

    |phi|^2 has standard deviation sigma. Unchirped packets are transform
    limited with arrival spread 1/(2 sigma); a chirp adds 4 chirp^2 sigma^2
    to the arrival variance.
    """
    if sigma <= 0:
        raise ContractError(f"spectral width must be positive, got {sigma}")
    grid = omega_grid(N, d_omega, omega_min)
    x = grid - omega0
    raw = np.exp(-(x**2) / (4.0 * sigma**2) + 1j * chirp * x**2)
    return SpectralAmplitude.normalize(grid, raw)


def rectangular_spectrum(
    omega_lo: float,
    omega_hi: float,
    N: int = 4096,
    d_omega: float = 0.01,
    omega_min: float = 0.0,
) -> SpectralAmplitude:
    """Flat band on [omega_lo, omega_hi]; its arrival profile is sinc^2."""
    if omega_hi <= omega_lo:
        raise ContractError("rectangular band needs omega_hi > omega_lo")
    grid = omega_grid(N, d_omega, omega_min)
    raw = ((grid >= omega_lo) & (grid <= omega_hi)).astype(np.complex128)
    return SpectralAmplitude.normalize(grid, raw)


def two_peak_spectrum(
    omega_a: float,
    omega_b: float,
    sigma: float,
    N: int = 4096,
    d_omega: float = 0.01,
    omega_min: float = 0.0,
    weights: tuple[float, float] = (0.5, 0.5),
) -> SpectralAmplitude:
    """Two Gaussian lines; weights are the probabilities of each line."""
    if sigma <= 0:
        raise ContractError(f"line width must be positive, got {sigma}")
    if min(weights) < 0 or sum(weights) <= 0:
        raise ContractError("line weights must be nonnegative and not both zero")
    grid = omega_grid(N, d_omega, omega_min)

    def line(center):
        g = np.exp(-((grid - center) ** 2) / (4.0 * sigma**2))
        return g / math.sqrt(float(np.sum(g**2)))

    w_a, w_b = weights
    raw = math.sqrt(w_a) * line(omega_a) + math.sqrt(w_b) * line(omega_b)
    return SpectralAmplitude.normalize(grid, raw)


def _centering_phase(N: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(N) * (N // 2) / N)


def to_time_domain(phi: SpectralAmplitude) -> TimeAmplitude:
    """
    phi~(t_k) = (1/2pi) sum_n d_omega exp(-i omega_n t_k) phi_n.

    The dual grid is t_k = (k - N//2) dt with dt = 2pi / (N d_omega); the
    transform is unitary, so sum |phi~_k|^2 dt = 1.
    """
    times = phi.times
    spectrum = scipy.fft.fft(phi.phi * _centering_phase(phi.N))
    values = (phi.d_omega / (2.0 * np.pi)) * np.exp(-1j * phi.omega_min * times) * spectrum
    return TimeAmplitude(times=times, values=values)


def from_time_domain(
    amplitude: TimeAmplitude, d_omega: float, omega_min: float = 0.0
) -> SpectralAmplitude:
    """Inverse of to_time_domain for a grid with the given spacing and origin."""
    N = amplitude.values.size
    grid = omega_grid(N, d_omega, omega_min)
    dt = 2.0 * np.pi / (N * d_omega)
    if abs(amplitude.dt - dt) > 1e-12 * dt:
        raise ContractError("time grid spacing does not match the frequency grid")
    shifted = amplitude.values * np.exp(1j * omega_min * amplitude.times)
    raw = dt * N * np.conj(_centering_phase(N)) * scipy.fft.ifft(shifted)
    return SpectralAmplitude.normalize(grid, raw)


def _shifted(phi: SpectralAmplitude, t0: float) -> SpectralAmplitude:
    # A screen at z0 delays the packet: phi~(t - t0) has spectrum phi * e^{i w t0}
    return SpectralAmplitude(phi.omega_grid, phi.phi * np.exp(1j * phi.omega_grid * t0))


def _edge_mass(p: np.ndarray, fraction: float) -> float:
    n = max(1, math.ceil(fraction * p.size))
    return float(np.sum(p[:n]) + np.sum(p[-n:]))


@dataclass(frozen=True, eq=False)
class ArrivalDistribution:
    times: np.ndarray
    p: np.ndarray
    t0: float
    edge_mass: float
    boundary_warning: bool


def arrival_distribution(
    phi: SpectralAmplitude, ev: ArrivalEvent, tol: Tolerances | None = None
) -> ArrivalDistribution:
    """p(t_k | Π_z0) = |phi~(t_k - t0)|^2 dt."""
    tol = tol or DEFAULT_TOLERANCES
    times = phi.times
    if not times[0] <= ev.t0 <= times[-1]:
        raise ContractError(
            f"arrival time {ev.t0} lies outside the time grid "
            f"[{times[0]:.6g}, {times[-1]:.6g}]"
        )
    p = to_time_domain(_shifted(phi, ev.t0)).probability()
    mass = _edge_mass(p, tol.edge_fraction)
    boundary = mass > tol.edge_mass
    if boundary:
        logger.warning("arrival distribution has %.3f of its mass at the grid edges", mass)
    return ArrivalDistribution(
        times=times, p=p, t0=ev.t0, edge_mass=mass, boundary_warning=boundary
    )


@dataclass(frozen=True)
class PhotonEnergy:
    E_mean: float
    E_std: float


def photon_energy_statistics(
    phi: SpectralAmplitude, ev: ArrivalEvent | None = None
) -> PhotonEnergy:
    """Moments of hbar*omega under |phi|^2 d_omega / 2pi; unchanged by the screen position."""
    if ev is not None:
        phi = _shifted(phi, ev.t0)
    w = phi.weights
    w = w / w.sum()
    mean = float(np.dot(phi.omega_grid, w))
    var = float(np.dot((phi.omega_grid - mean) ** 2, w))
    return PhotonEnergy(E_mean=mean, E_std=math.sqrt(max(var, 0.0)))


def time_window(times: np.ndarray, p: np.ndarray, window: tuple[float, float] | None):
    """Restrict a distribution to [lo, hi] and renormalize; None keeps the whole grid."""
    if window is None:
        return times, p, (float(times[0]), float(times[-1]))
    lo, hi = window
    if hi <= lo:
        raise ContractError("time window needs hi > lo")
    mask = (times >= lo) & (times <= hi)
    mass = float(p[mask].sum())
    if mass <= 0:
        raise ContractError("time window holds no probability")
    return times[mask], p[mask] / mass, (float(lo), float(hi))


@dataclass
class TimeBandwidthReport:
    N: int
    d_omega: float
    dt: float
    z0: float
    t0: float
    times: np.ndarray
    p_t_given_event: np.ndarray
    window: tuple[float, float]
    t_mean: float
    t_std: float
    E_mean: float
    E_std: float
    product: float
    margin: float
    edge_mass: float
    boundary_warning: bool
    warnings: list[str] = field(default_factory=list)
    bound: float = BOUND

    kind = "photon_arrival"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "N": self.N,
            "d_omega": self.d_omega,
            "dt": self.dt,
            "z0": self.z0,
            "t0": self.t0,
            "times": [float(t) for t in self.times],
            "p_t_given_event": [float(p) for p in self.p_t_given_event],
            "window": list(self.window),
            "t_mean": self.t_mean,
            "t_std": self.t_std,
            "E_mean": self.E_mean,
            "E_std": self.E_std,
            "product": self.product,
            "bound": self.bound,
            "margin": self.margin,
            "edge_mass": self.edge_mass,
            "boundary_warning": self.boundary_warning,
            "warnings": list(self.warnings),
        }


def time_bandwidth_report(
    phi: SpectralAmplitude,
    ev: ArrivalEvent | None = None,
    window: tuple[float, float] | None = None,
    tol: Tolerances | None = None,
) -> TimeBandwidthReport:
    """Arrival spread times spectral width, against the 1/2 bound."""
    ev = ev or ArrivalEvent()
    dist = arrival_distribution(phi, ev, tol)
    times, p, used = time_window(dist.times, dist.p, window)
    t_mean = float(np.dot(times, p))
    t_std = math.sqrt(max(float(np.dot((times - t_mean) ** 2, p)), 0.0))
    energy = photon_energy_statistics(phi, ev)
    product = t_std * energy.E_std

    warnings = []
    if dist.boundary_warning:
        warnings.append(
            f"{dist.edge_mass:.3f} of the arrival mass lies at the time-grid edges"
        )
    return TimeBandwidthReport(
        N=phi.N,
        d_omega=phi.d_omega,
        dt=phi.dt,
        z0=ev.z0,
        t0=ev.t0,
        times=dist.times,
        p_t_given_event=dist.p,
        window=used,
        t_mean=t_mean,
        t_std=t_std,
        E_mean=energy.E_mean,
        E_std=energy.E_std,
        product=product,
        margin=product - BOUND,
        edge_mass=dist.edge_mass,
        boundary_warning=dist.boundary_warning,
        warnings=warnings,
    )


@dataclass
class FrequencyEventReport:
    omega0: float
    omega_bin: float
    d_omega: float
    T_total: float
    p_event: float
    times: np.ndarray
    p_t_given_event: np.ndarray
    t_mean: float
    t_std: float
    t_std_window: float
    E_mean: float
    E_std: float
    product: float
    margin: float
    warnings: list[str] = field(default_factory=list)
    bound: float = BOUND

    kind = "photon_frequency"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "omega0": self.omega0,
            "omega_bin": self.omega_bin,
            "d_omega": self.d_omega,
            "T_total": self.T_total,
            "p_event": self.p_event,
            "times": [float(t) for t in self.times],
            "p_t_given_event": [float(p) for p in self.p_t_given_event],
            "t_mean": self.t_mean,
            "t_std": self.t_std,
            "t_std_window": self.t_std_window,
            "E_mean": self.E_mean,
            "E_std": self.E_std,
            "product": self.product,
            "bound": self.bound,
            "margin": self.margin,
            "warnings": list(self.warnings),
        }


def frequency_event_report(
    phi: SpectralAmplitude,
    omega0: float,
    T_total: float,
    samples: int = 256,
    tol: Tolerances | None = None,
) -> FrequencyEventReport:
    """
    Event "the photon has frequency omega0", realized as one grid bin.

    The spectral state is evolved over `samples` midpoints of the window and
    projected onto the bin; the Bayes-conditioned distribution comes out flat,
    so t_std approaches T_total/sqrt(12) (exact up to the midpoint-grid factor
    sqrt(1 - 1/samples^2)) while the energy spread stays at the bin-width floor
    d_omega/sqrt(12).
    """
    tol = tol or DEFAULT_TOLERANCES
    if not T_total > 0:
        raise ContractError(f"time window must be positive, got {T_total}")
    if int(samples) != samples or samples < 1:
        raise ContractError(f"samples must be a positive integer, got {samples}")
    n0 = int(round((omega0 - phi.omega_min) / phi.d_omega))
    if not 0 <= n0 < phi.N:
        raise ContractError(f"omega0 = {omega0} lies outside the frequency grid")

    times = -0.5 * T_total + (np.arange(samples) + 0.5) * T_total / samples
    # frequency basis: evolution is a phase per bin and the projector keeps bin n0
    amplitude = phi.phi[n0] * np.exp(-1j * phi.omega_grid[n0] * times)
    joint = np.abs(amplitude) ** 2 * (phi.d_omega / (2.0 * np.pi)) / samples
    p_event = float(np.sum(joint))
    if p_event <= tol.p_floor:
        raise EventNeverHappens(
            f"spectral weight at omega0 = {omega0} is {p_event:.3e}, below the floor"
        )
    p = joint / p_event
    moments = time_statistics(p, times)

    t_std_window = T_total / math.sqrt(12.0)
    E_std = phi.d_omega / math.sqrt(12.0)
    product = moments.t_std * E_std
    warnings = ["energy spread is the bin-width floor of the frequency grid"]
    correction = t_std_window - moments.t_std
    if correction > 0:
        warnings.append(
            f"midpoint grid of {samples} samples lowers t_std by {correction:.3e} "
            f"from T_total/sqrt(12)"
        )
    logger.debug("frequency event at %.6g: p=%.3e t_std=%.6g", omega0, p_event, moments.t_std)
    return FrequencyEventReport(
        omega0=float(omega0),
        omega_bin=float(phi.omega_grid[n0]),
        d_omega=phi.d_omega,
        T_total=float(T_total),
        p_event=p_event,
        times=times,
        p_t_given_event=p,
        t_mean=moments.t_mean,
        t_std=moments.t_std,
        t_std_window=t_std_window,
        E_mean=float(phi.omega_grid[n0]),
        E_std=E_std,
        product=product,
        margin=product - BOUND,
        warnings=warnings,
    )
