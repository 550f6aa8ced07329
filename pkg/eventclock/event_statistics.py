"""
Event Statistics Module
Conditional time and energy statistics of an event Π read off the history
state, and the uncertainty products built from them.
"""

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ContractError, EventNeverHappens, NumericalError
from .history_state import HistoryState
from .quantum_core import Projector, variance

logger = logging.getLogger(__name__)

BOUND_CONDITIONAL = 0.5


@dataclass(frozen=True, eq=False)
class EventSpec:
    projector: Projector
    label: str = "event"


@dataclass(frozen=True, eq=False)
class Conditioning:
    p_event: float
    alpha_T: float
    p_conditional: np.ndarray


@dataclass(frozen=True)
class TimeMoments:
    t_mean: float
    t_std: float


@dataclass(frozen=True)
class EnergyMoments:
    E_mean: float
    E_std: float
    path: str


@dataclass(frozen=True)
class CenteringDiagnostics:
    """
    Moments of T_π = Tc ⊗ Π and H_π = Hc ⊗ Π on the history state.

    `*_raw` use the grid as built, `*_centered` shift the origin so the
    first moment of the operator vanishes. The centered values equal the
    conditional variances; the raw ones exceed them by `*_discrepancy`.
    """

    p_event: float
    t_var: float
    T_pi_mean: float
    time_raw: float
    time_centered: float
    time_discrepancy: float
    E_var: float
    H_pi_mean: float
    energy_raw: float
    energy_centered: float
    energy_discrepancy: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EventReport:
    label: str
    d: int
    dt: float
    T_total: float
    p_event: float
    alpha_T: float
    times: np.ndarray
    p_t_given_event: np.ndarray
    t_mean: float
    t_std: float
    E_mean: float
    E_std: float
    energy_path: str
    commuting: bool
    commutator_norm: float
    E_mean_clock: float
    E_std_clock: float
    E_mean_history: float | None
    E_std_history: float | None
    delta_Hs: float
    product_conditional: float
    margin_conditional: float
    product_unconditional: float
    bound_unconditional: float
    margin_unconditional: float
    product_clock: float
    robertson_bound: float
    schrodinger_bound: float
    edge_mass: float
    boundary_warning: bool
    warnings: list[str] = field(default_factory=list)
    bound_conditional: float = BOUND_CONDITIONAL

    kind = "finite_dim"

    def to_dict(self) -> dict:
        data = asdict(self)
        data["kind"] = self.kind
        data["times"] = [float(t) for t in self.times]
        data["p_t_given_event"] = [float(p) for p in self.p_t_given_event]
        return data


def _event_amplitudes(h: HistoryState, ev: EventSpec) -> np.ndarray:
    """(1 ⊗ Π)|Ψ>> as a (d, dim_s) array."""
    if ev.projector.space != h.system:
        raise ContractError(
            f"event projector lives on '{ev.projector.space.name}' "
            f"({ev.projector.space.dimension}) but the system is '{h.system.name}' "
            f"({h.system.dimension})"
        )
    return h.joint @ ev.projector.matrix.T


def joint_time_distribution(h: HistoryState, ev: EventSpec) -> np.ndarray:
    """p(t_k, Π) = <psi(t_k)|Π|psi(t_k)> / d."""
    y = _event_amplitudes(h, ev)
    return np.sum(np.abs(y) ** 2, axis=1)


def condition_on_event(p_joint, tol: Tolerances | None = None) -> Conditioning:
    """Bayes' rule p(t|Π) = p(t, Π) / p(Π)."""
    tol = tol or DEFAULT_TOLERANCES
    p_joint = np.asarray(p_joint, dtype=np.float64)
    if np.any(p_joint < -tol.norm):
        raise ContractError("joint probabilities must be nonnegative")
    p_joint = np.clip(p_joint, 0.0, None)
    p_event = float(np.sum(p_joint))
    if p_event <= tol.p_floor:
        raise EventNeverHappens(
            f"event probability {p_event:.3e} is at or below the floor {tol.p_floor:.1e}"
        )
    return Conditioning(
        p_event=p_event, alpha_T=1.0 / p_event, p_conditional=p_joint / p_event
    )


def time_statistics(p_conditional, times) -> TimeMoments:
    p = np.asarray(p_conditional, dtype=np.float64)
    t = np.asarray(times, dtype=np.float64)
    if p.shape != t.shape:
        raise ContractError(
            f"distribution has {p.size} entries but the grid has {t.size}"
        )
    t_mean = float(np.dot(t, p))
    var = float(np.dot((t - t_mean) ** 2, p))
    return TimeMoments(t_mean=t_mean, t_std=math.sqrt(max(var, 0.0)))


def _commutator_gate(h: HistoryState, ev: EventSpec, tol: Tolerances) -> tuple[bool, float]:
    norm = ev.projector.operator.commutator_norm(h.Hs)
    return norm <= tol.commutator_gate * max(1.0, h.Hs.max_abs), norm


def _moments(p: float, amps: np.ndarray, applied: np.ndarray) -> tuple[float, float]:
    """Bayes-normalized first moment and standard deviation."""
    mean = float(np.vdot(amps, applied).real) / p
    second = float(np.vdot(applied, applied).real) / p
    return mean, math.sqrt(max(second - mean * mean, 0.0))


def conditional_energy_commuting(
    h: HistoryState, ev: EventSpec, tol: Tolerances | None = None
) -> EnergyMoments:
    """
    Moments of Π Hs Π on a single slice, scaled by αT.

    Only meaningful when [Π, Hs] = 0; the conditional moments are then the
    same at every clock reading. They are taken on the initial slice and
    checked against the slice at the start of the window.
    """
    tol = tol or DEFAULT_TOLERANCES
    passes, norm = _commutator_gate(h, ev, tol)
    if not passes:
        raise ContractError(
            f"event projector does not commute with Hs (|[Π, Hs]| = {norm:.3e}); "
            "use conditional_energy_clock"
        )
    mean, std = _slice_moments(h, ev, h.psi0.amplitudes, tol)
    first_mean, first_std = _slice_moments(h, ev, h.trajectory[0], tol)
    scale = max(1.0, h.Hs.max_abs)
    # drift allowed by a commutator at the gate, over half the window
    limit = tol.commutator_gate * scale * max(1.0, h.clock.T_total * scale)
    if abs(first_mean - mean) > limit or abs(first_std**2 - std**2) > limit * scale:
        raise NumericalError(
            f"conditional energy depends on the slice: E_mean {mean!r} at t=0, "
            f"{first_mean!r} at t={h.clock.times[0]!r}"
        )
    return EnergyMoments(E_mean=mean, E_std=std, path="commuting")


def _slice_moments(h: HistoryState, ev: EventSpec, amps: np.ndarray, tol: Tolerances):
    v = ev.projector.matrix @ amps
    p = float(np.vdot(v, v).real)
    if p <= tol.p_floor:
        raise EventNeverHappens(f"event probability {p:.3e} is at or below the floor")
    return _moments(p, v, h.Hs.matrix @ v)


def conditional_energy_history(
    h: HistoryState, ev: EventSpec, tol: Tolerances | None = None
) -> EnergyMoments:
    """Moments of 1 ⊗ Π Hs Π on |Psi>>, scaled by αT."""
    tol = tol or DEFAULT_TOLERANCES
    y = _event_amplitudes(h, ev)
    p = float(np.vdot(y, y).real)
    if p <= tol.p_floor:
        raise EventNeverHappens(f"event probability {p:.3e} is at or below the floor")
    mean, std = _moments(p, y, y @ h.Hs.matrix.T)
    return EnergyMoments(E_mean=mean, E_std=std, path="history")


def conditional_energy_clock(
    h: HistoryState, ev: EventSpec, tol: Tolerances | None = None
) -> EnergyMoments:
    """
    Event energy read from the clock: E = -αT <H_π>, ΔE² = αT <H_π²> - E².

    H_π = Hc ⊗ Π. The sign makes E match the system energy scale, since
    the constraint ties Hc to -Hs.
    """
    tol = tol or DEFAULT_TOLERANCES
    y = _event_amplitudes(h, ev)
    p = float(np.vdot(y, y).real)
    if p <= tol.p_floor:
        raise EventNeverHappens(f"event probability {p:.3e} is at or below the floor")
    mean, std = _moments(p, y, h.clock.apply_energy(y, axis=0))
    return EnergyMoments(E_mean=-mean, E_std=std, path="clock")


def centering_diagnostics(
    h: HistoryState, ev: EventSpec, tol: Tolerances | None = None
) -> CenteringDiagnostics:
    tol = tol or DEFAULT_TOLERANCES
    y = _event_amplitudes(h, ev)
    p_joint = np.sum(np.abs(y) ** 2, axis=1)
    cond = condition_on_event(p_joint, tol)
    p, alpha = cond.p_event, cond.alpha_T
    times = h.clock.times
    t_var = time_statistics(cond.p_conditional, times).t_std ** 2

    T_mean = float(np.dot(times, p_joint))
    T_second = float(np.dot(times**2, p_joint))
    time_raw = alpha * (T_second - T_mean**2)
    shifted = times - T_mean / p
    Ts_mean = float(np.dot(shifted, p_joint))
    time_centered = alpha * (float(np.dot(shifted**2, p_joint)) - Ts_mean**2)

    z = h.clock.apply_energy(y, axis=0)
    H_mean = float(np.vdot(y, z).real)
    H_second = float(np.vdot(z, z).real)
    energy_raw = alpha * (H_second - H_mean**2)
    zs = z - (H_mean / p) * y
    Hs_mean = float(np.vdot(y, zs).real)
    energy_centered = alpha * (float(np.vdot(zs, zs).real) - Hs_mean**2)
    E_var = H_second / p - (H_mean / p) ** 2

    return CenteringDiagnostics(
        p_event=p,
        t_var=t_var,
        T_pi_mean=T_mean,
        time_raw=time_raw,
        time_centered=time_centered,
        time_discrepancy=T_mean**2 * (1.0 - p) / p**2,
        E_var=E_var,
        H_pi_mean=H_mean,
        energy_raw=energy_raw,
        energy_centered=energy_centered,
        energy_discrepancy=H_mean**2 * (1.0 - p) / p**2,
    )


def clock_uncertainty_bounds(h: HistoryState, ev: EventSpec) -> tuple[float, float, float]:
    """
    (product, Schrodinger bound, Robertson bound) for Tc and Hc on the
    conditioned history state (1 ⊗ Π)|Psi>> / sqrt(p).

    product >= Schrodinger >= Robertson at any d; Robertson tends to 1/2 as
    the clock approaches [Tc, Hc] = i.
    """
    y = _event_amplitudes(h, ev)
    p = float(np.vdot(y, y).real)
    if p <= 0:
        raise EventNeverHappens("event never happens")
    phi = y / math.sqrt(p)
    t_phi = h.clock.apply_time(phi, axis=0)
    h_phi = h.clock.apply_energy(phi, axis=0)
    t_mean = float(np.vdot(phi, t_phi).real)
    h_mean = float(np.vdot(phi, h_phi).real)
    t_std = math.sqrt(max(float(np.vdot(t_phi, t_phi).real) - t_mean**2, 0.0))
    h_std = math.sqrt(max(float(np.vdot(h_phi, h_phi).real) - h_mean**2, 0.0))
    cross = complex(np.vdot(t_phi, h_phi))
    robertson = abs(cross.imag)
    schrodinger = math.hypot(cross.imag, cross.real - t_mean * h_mean)
    return t_std * h_std, schrodinger, robertson


def edge_mass(p_conditional, edge_fraction: float = DEFAULT_TOLERANCES.edge_fraction) -> float:
    """Conditional mass in the outer `edge_fraction` of the grid at both ends."""
    p = np.asarray(p_conditional, dtype=np.float64)
    n = max(1, math.ceil(edge_fraction * p.size))
    return float(np.sum(p[:n]) + np.sum(p[-n:]))


def uncertainty_report(
    h: HistoryState, ev: EventSpec, tol: Tolerances | None = None
) -> EventReport:
    tol = tol or DEFAULT_TOLERANCES
    clock = h.clock

    cond = condition_on_event(joint_time_distribution(h, ev), tol)
    tm = time_statistics(cond.p_conditional, clock.times)

    warnings = []
    commuting, comm_norm = _commutator_gate(h, ev, tol)
    clock_path = conditional_energy_clock(h, ev, tol)
    history_path = None
    if commuting:
        primary = conditional_energy_commuting(h, ev, tol)
        history_path = conditional_energy_history(h, ev, tol)
        scale = max(1.0, h.Hs.max_abs)
        gap_mean = abs(primary.E_mean - history_path.E_mean)
        gap_var = abs(primary.E_std**2 - history_path.E_std**2)
        if gap_mean > tol.commutator_gate * scale or gap_var > tol.commutator_gate * scale**2:
            msg = (
                f"slice and history energy paths disagree: E_mean differs by {gap_mean:.3e}, "
                f"variance by {gap_var:.3e}"
            )
            warnings.append(msg)
            logger.warning("event '%s': %s", ev.label, msg)
    else:
        primary = clock_path

    delta_Hs = math.sqrt(variance(h.psi0, h.Hs, tol))
    product_clock, schrodinger, robertson = clock_uncertainty_bounds(h, ev)

    mass = edge_mass(cond.p_conditional, tol.edge_fraction)
    boundary = mass > tol.edge_mass
    if boundary:
        msg = (
            f"{mass:.3f} of the conditional mass lies in the outer "
            f"{tol.edge_fraction:.0%} of the clock grid at each end"
        )
        warnings.append(msg)
        logger.warning("event '%s': %s", ev.label, msg)
    if not commuting:
        warnings.append("event does not commute with Hs; energy read from the clock")

    product_conditional = tm.t_std * primary.E_std
    product_unconditional = tm.t_std * delta_Hs
    bound_unconditional = BOUND_CONDITIONAL * math.sqrt(cond.p_event)

    return EventReport(
        label=ev.label,
        d=clock.d,
        dt=clock.dt,
        T_total=clock.T_total,
        p_event=cond.p_event,
        alpha_T=cond.alpha_T,
        times=clock.times,
        p_t_given_event=cond.p_conditional,
        t_mean=tm.t_mean,
        t_std=tm.t_std,
        E_mean=primary.E_mean,
        E_std=primary.E_std,
        energy_path=primary.path,
        commuting=commuting,
        commutator_norm=comm_norm,
        E_mean_clock=clock_path.E_mean,
        E_std_clock=clock_path.E_std,
        E_mean_history=history_path.E_mean if history_path else None,
        E_std_history=history_path.E_std if history_path else None,
        delta_Hs=delta_Hs,
        product_conditional=product_conditional,
        margin_conditional=product_conditional - BOUND_CONDITIONAL,
        product_unconditional=product_unconditional,
        bound_unconditional=bound_unconditional,
        margin_unconditional=product_unconditional - bound_unconditional,
        product_clock=product_clock,
        robertson_bound=robertson,
        schrodinger_bound=schrodinger,
        edge_mass=mass,
        boundary_warning=boundary,
        warnings=warnings,
    )
