"""
Dense Reference Implementations
Brute-force Born-rule evaluation on the full joint space. Shares only the
quantum-core primitives and the clock's dense matrices with the main path.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import EventNeverHappens, OracleMismatch, ResourceError
from .quantum_core import (
    HermitianOperator,
    StateVector,
    Units,
    expectation,
    tensor_product,
    variance,
)

logger = logging.getLogger(__name__)

# EventReport fields the dense path reproduces
ORACLE_FIELDS = (
    "p_event",
    "alpha_T",
    "p_t_given_event",
    "t_mean",
    "t_std",
    "E_mean",
    "E_std",
    "commuting",
    "E_mean_clock",
    "E_std_clock",
    "E_mean_history",
    "E_std_history",
    "delta_Hs",
    "product_conditional",
    "product_unconditional",
    "bound_unconditional",
    "product_clock",
    "robertson_bound",
    "schrodinger_bound",
    "edge_mass",
)


@dataclass(frozen=True)
class DenseMoments:
    mean: float
    second_moment: float

    @property
    def variance(self) -> float:
        return max(self.second_moment - self.mean**2, 0.0)


def _check_cap(dim: int, tol: Tolerances):
    if dim > tol.oracle_max_dim:
        raise ResourceError(
            f"dense oracle limited to dimension {tol.oracle_max_dim}, got {dim}"
        )


def _lift(h, projector) -> HermitianOperator:
    return tensor_product(HermitianOperator.identity(h.clock.space), projector)


def born_rule_joint(h, ev, tol: Tolerances | None = None) -> np.ndarray:
    """p(t_k, Π) = Tr[(|t_k><t_k| ⊗ Π) |Psi>><<Psi|] with dense matrices."""
    tol = tol or DEFAULT_TOLERANCES
    _check_cap(h.psi.dimension, tol)
    psi = h.psi.amplitudes
    rho = np.outer(psi, psi.conj())
    pi = ev.projector.matrix
    out = np.empty(h.clock.d)
    for k in range(h.clock.d):
        tick = np.zeros((h.clock.d, h.clock.d), dtype=np.complex128)
        tick[k, k] = 1.0
        P = np.kron(tick, pi)
        out[k] = float(np.einsum("ij,ji->", P, rho).real)
    return out


def dense_moments(h, A: HermitianOperator, tol: Tolerances | None = None) -> DenseMoments:
    """<<Psi|A|Psi>> and <<Psi|A²|Psi>> by dense matrix-vector products."""
    tol = tol or DEFAULT_TOLERANCES
    _check_cap(A.space.dimension, tol)
    psi = h.psi.amplitudes
    a_psi = A.matrix @ psi
    mean = float(np.vdot(psi, a_psi).real)
    second = float(np.vdot(psi, A.matrix @ a_psi).real)
    return DenseMoments(mean=mean, second_moment=second)


def dense_event_fields(h, ev, tol: Tolerances | None = None) -> dict:
    """Every EventReport field in ORACLE_FIELDS, computed densely."""
    tol = tol or DEFAULT_TOLERANCES
    clock = h.clock
    _check_cap(h.psi.dimension, tol)

    pi = ev.projector.operator
    Hs = h.Hs
    p_joint = born_rule_joint(h, ev, tol)
    p = float(np.sum(p_joint))
    if p <= tol.p_floor:
        raise EventNeverHappens(f"event probability {p:.3e} is at or below the floor")
    p_cond = p_joint / p

    T_pi = tensor_product(clock.Tc, pi)
    H_pi = tensor_product(clock.Hc, pi)
    tm = dense_moments(h, T_pi, tol)
    hm = dense_moments(h, H_pi, tol)
    t_mean = tm.mean / p
    t_std = math.sqrt(max(tm.second_moment / p - t_mean**2, 0.0))
    E_mean_clock = -hm.mean / p
    E_std_clock = math.sqrt(max(hm.second_moment / p - (hm.mean / p) ** 2, 0.0))

    a, b = pi.matrix, Hs.matrix
    comm = float(np.max(np.abs(a @ b - b @ a)))
    commuting = comm <= tol.commutator_gate * max(1.0, Hs.max_abs)

    E_mean_history = E_std_history = None
    if commuting:
        conditioned = StateVector.normalize(h.system, a @ h.psi0.amplitudes)
        E_mean = expectation(conditioned, Hs, tol)
        E_std = math.sqrt(variance(conditioned, Hs, tol))

        pHp = HermitianOperator(h.system, a @ b @ a, Units.ENERGY)
        pH2p = HermitianOperator(h.system, a @ b @ b @ a, Units.ENERGY)
        ident = HermitianOperator.identity(clock.space)
        m1 = dense_moments(h, tensor_product(ident, pHp), tol).mean / p
        m2 = dense_moments(h, tensor_product(ident, pH2p), tol).mean / p
        E_mean_history = m1
        E_std_history = math.sqrt(max(m2 - m1**2, 0.0))
    else:
        E_mean, E_std = E_mean_clock, E_std_clock

    delta_Hs = math.sqrt(variance(h.psi0, Hs, tol))

    # Robertson/Schrodinger pair on the conditioned joint state
    phi = _lift(h, ev.projector).matrix @ h.psi.amplitudes / math.sqrt(p)
    T_full = tensor_product(clock.Tc, HermitianOperator.identity(h.system)).matrix
    H_full = tensor_product(clock.Hc, HermitianOperator.identity(h.system)).matrix
    t_phi, h_phi = T_full @ phi, H_full @ phi
    mt = float(np.vdot(phi, t_phi).real)
    mh = float(np.vdot(phi, h_phi).real)
    st = math.sqrt(max(float(np.vdot(t_phi, t_phi).real) - mt**2, 0.0))
    sh = math.sqrt(max(float(np.vdot(h_phi, h_phi).real) - mh**2, 0.0))
    cross = complex(np.vdot(t_phi, h_phi))

    n_edge = max(1, math.ceil(tol.edge_fraction * clock.d))
    return {
        "p_event": p,
        "alpha_T": 1.0 / p,
        "p_t_given_event": p_cond,
        "t_mean": t_mean,
        "t_std": t_std,
        "E_mean": E_mean,
        "E_std": E_std,
        "commuting": commuting,
        "E_mean_clock": E_mean_clock,
        "E_std_clock": E_std_clock,
        "E_mean_history": E_mean_history,
        "E_std_history": E_std_history,
        "delta_Hs": delta_Hs,
        "product_conditional": t_std * E_std,
        "product_unconditional": t_std * delta_Hs,
        "bound_unconditional": 0.5 * math.sqrt(p),
        "product_clock": st * sh,
        "robertson_bound": abs(cross.imag),
        "schrodinger_bound": math.hypot(cross.imag, cross.real - mt * mh),
        "edge_mass": float(p_cond[:n_edge].sum() + p_cond[-n_edge:].sum()),
    }


def compare_fields(report: dict, reference: dict, atol: float = 1e-10) -> list[str]:
    """
    Names of fields where `report` and `reference` disagree.

    Scalars compare within atol * max(1, |reference|); arrays elementwise.
    """
    mismatched = []
    for name, expected in reference.items():
        actual = report.get(name)
        if expected is None or actual is None or isinstance(expected, bool):
            if actual != expected:
                mismatched.append(name)
            continue
        exp_arr = np.asarray(expected, dtype=np.float64)
        act_arr = np.asarray(actual, dtype=np.float64)
        if exp_arr.shape != act_arr.shape:
            mismatched.append(name)
            continue
        scale = np.maximum(1.0, np.abs(exp_arr))
        if np.any(np.abs(act_arr - exp_arr) > atol * scale):
            mismatched.append(name)
    return mismatched


def oracle_check(h, ev, report, tol: Tolerances | None = None, atol: float = 1e-10) -> dict:
    """Compare a structured report against the dense path; raise on mismatch."""
    reference = dense_event_fields(h, ev, tol)
    produced = report.to_dict() if hasattr(report, "to_dict") else dict(report)
    mismatched = compare_fields(produced, reference, atol)
    if mismatched:
        details = ", ".join(
            f"{name}={produced.get(name)!r} vs {reference[name]!r}"
            for name in mismatched
            if name != "p_t_given_event"
        )
        raise OracleMismatch(
            f"structured and dense paths disagree on {', '.join(mismatched)}"
            + (f" ({details})" if details else "")
        )
    logger.debug("oracle agreement on %d fields for '%s'", len(reference), ev.label)
    return reference
