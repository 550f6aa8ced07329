import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import QUBIT, history, qubit_event, qubit_hamiltonian
from eventclock.errors import ContractError, EventNeverHappens, NumericalError
from eventclock.event_statistics import (
    EnergyMoments,
    EventSpec,
    centering_diagnostics,
    clock_uncertainty_bounds,
    condition_on_event,
    conditional_energy_clock,
    conditional_energy_commuting,
    conditional_energy_history,
    edge_mass,
    joint_time_distribution,
    time_statistics,
    uncertainty_report,
)
from eventclock.oracle import dense_event_fields
from eventclock.quantum_core import (
    HermitianOperator,
    HilbertLabel,
    Projector,
    StateVector,
    Units,
)
from eventclock.verification import oracle_scenario, packet_scenario

PLUS = StateVector.normalize(QUBIT, [1, 1])


def test_stationary_event_is_uniform():
    Hs = HermitianOperator.zeros(QUBIT, Units.ENERGY)
    h = history(Hs, StateVector.basis(QUBIT, 0), 16, 0.1)
    p = joint_time_distribution(h, qubit_event(0))
    assert np.allclose(p, 1 / 16, atol=1e-15)


def test_null_event_never_happens():
    h = history(qubit_hamiltonian("x"), PLUS, 16, 0.1)
    ev = EventSpec(Projector.zero(QUBIT), "never")
    assert np.all(joint_time_distribution(h, ev) == 0)
    with pytest.raises(EventNeverHappens):
        condition_on_event(joint_time_distribution(h, ev))
    with pytest.raises(EventNeverHappens):
        uncertainty_report(h, ev)


def test_rabi_joint_distribution():
    h = history(qubit_hamiltonian("x"), StateVector.basis(QUBIT, 0), 256, 0.05)
    p = joint_time_distribution(h, qubit_event(1))
    assert np.allclose(p, np.sin(h.clock.times) ** 2 / 256, atol=1e-12)
    assert np.all(p <= 1 / 256 + 1e-12)

    cond = condition_on_event(p)
    assert cond.p_event == pytest.approx(np.sum(np.sin(h.clock.times) ** 2) / 256, abs=1e-12)
    T = h.clock.T_total
    assert cond.p_event == pytest.approx(0.5 - math.sin(T) / (2 * T), abs=5e-3)


def test_condition_examples():
    cond = condition_on_event(np.full(4, 1 / 16))
    assert cond.p_event == pytest.approx(0.25)
    assert cond.alpha_T == pytest.approx(4.0)
    assert np.allclose(cond.p_conditional, 0.25)

    one_hot = np.zeros(8)
    one_hot[3] = 0.2
    cond = condition_on_event(one_hot)
    assert cond.p_event == pytest.approx(0.2)
    assert cond.p_conditional[3] == pytest.approx(1.0)

    with pytest.raises(ContractError):
        condition_on_event([0.1, -0.5])


def test_time_statistics():
    d, dt = 64, 0.1
    times = (np.arange(d) - d // 2) * dt
    uniform = time_statistics(np.full(d, 1 / d), times)
    assert uniform.t_mean == pytest.approx(-dt / 2, abs=1e-14)
    assert uniform.t_std == pytest.approx(dt * math.sqrt((d * d - 1) / 12), rel=1e-12)

    one_hot = np.zeros(d)
    one_hot[40] = 1.0
    stats = time_statistics(one_hot, times)
    assert stats.t_mean == pytest.approx(times[40])
    assert stats.t_std == 0.0

    d = 512
    times = (np.arange(d) - d // 2) * dt
    sigma = 20 * dt
    gauss = np.exp(-(times**2) / (2 * sigma**2))
    stats = time_statistics(gauss / gauss.sum(), times)
    assert stats.t_std == pytest.approx(sigma, rel=1e-4)

    with pytest.raises(ContractError):
        time_statistics([0.5, 0.5], times)


def test_commuting_energy_examples():
    Hz = qubit_hamiltonian("z")
    h = history(Hz, PLUS, 32, 0.1)
    eigen = conditional_energy_commuting(h, qubit_event(0))
    assert eigen.E_mean == pytest.approx(1.0, abs=1e-12)
    assert eigen.E_std == pytest.approx(0.0, abs=1e-7)

    everything = conditional_energy_commuting(h, EventSpec(Projector.identity(QUBIT)))
    assert everything.E_mean == pytest.approx(0.0, abs=1e-12)
    assert everything.E_std == pytest.approx(1.0, abs=1e-12)

    three = HilbertLabel("system", 3)
    Hs = HermitianOperator(three, np.diag([0.0, 1.0, 2.0]), Units.ENERGY)
    psi0 = StateVector.normalize(three, np.ones(3))
    ev = EventSpec(Projector.onto(three, [[1, 0, 0], [0, 0, 1]]))
    h3 = history(Hs, psi0, 32, 0.1)
    res = conditional_energy_commuting(h3, ev)
    assert res.E_mean == pytest.approx(1.0, abs=1e-12)
    assert res.E_std == pytest.approx(1.0, abs=1e-12)

    via_history = conditional_energy_history(h3, ev)
    assert via_history.E_mean == pytest.approx(res.E_mean, abs=1e-10)
    assert via_history.E_std == pytest.approx(res.E_std, abs=1e-10)

    dense = dense_event_fields(h3, ev)
    assert dense["E_mean"] == pytest.approx(1.0, abs=1e-10)
    assert dense["E_std"] == pytest.approx(1.0, abs=1e-10)


def test_commuting_energy_checks_slice_independence():
    three = HilbertLabel("system", 3)
    Hs = HermitianOperator(three, np.diag([0.0, 1.0, 2.0]), Units.ENERGY)
    ev = EventSpec(Projector.onto(three, [[1, 0, 0], [0, 0, 1]]))
    h = history(Hs, StateVector.normalize(three, np.ones(3)), 32, 0.1)
    first = conditional_energy_commuting(h, ev)

    tampered = h.trajectory.copy()
    tampered[0] = [1, 0, 0]
    h.__dict__["trajectory"] = tampered
    with pytest.raises(NumericalError, match="depends on the slice"):
        conditional_energy_commuting(h, ev)
    assert first.E_mean == pytest.approx(1.0, abs=1e-12)


def test_commuting_gate_rejects_non_commuting_event():
    h = history(qubit_hamiltonian("x"), StateVector.basis(QUBIT, 0), 16, 0.2)
    with pytest.raises(ContractError, match="conditional_energy_clock"):
        conditional_energy_commuting(h, qubit_event(0))


def test_clock_energy_without_dynamics():
    Hs = HermitianOperator.zeros(QUBIT, Units.ENERGY)
    h = history(Hs, PLUS, 64, 0.1)
    res = conditional_energy_clock(h, EventSpec(Projector.identity(QUBIT)))
    assert res.E_mean == pytest.approx(0.0, abs=1e-12)
    assert res.E_std == pytest.approx(0.0, abs=1e-6)


def test_clock_energy_tracks_commuting_path():
    d = 512
    h = history(qubit_hamiltonian("z"), StateVector.basis(QUBIT, 0), d, 2 * math.pi * 4 / d)
    ev = qubit_event(0)
    clock = conditional_energy_clock(h, ev)
    system = conditional_energy_commuting(h, ev)
    assert system.E_mean == pytest.approx(1.0, abs=1e-12)
    assert abs(clock.E_mean - system.E_mean) <= h.clock.energy_resolution
    assert abs(clock.E_std - system.E_std) <= h.clock.energy_resolution


def test_clock_energy_non_commuting_matches_dense():
    h = history(qubit_hamiltonian("x"), StateVector.basis(QUBIT, 0), 16, 0.2)
    ev = qubit_event(0)
    res = conditional_energy_clock(h, ev)
    dense = dense_event_fields(h, ev)
    assert res.E_mean == pytest.approx(dense["E_mean_clock"], abs=1e-10)
    assert res.E_std == pytest.approx(dense["E_std_clock"], abs=1e-10)
    assert math.isfinite(res.E_mean) and res.E_std > 0


@pytest.mark.parametrize("seed", [1000, 1001, 1002, 1003, 1004, 1005])
def test_centering_identities(seed):
    scenario = oracle_scenario(seed)
    c = centering_diagnostics(scenario.history(), scenario.event)
    assert abs(c.time_centered - c.t_var) <= 1e-10 * max(1.0, c.t_var)
    assert abs((c.time_raw - c.t_var) - c.time_discrepancy) <= 1e-10 * max(1.0, c.time_raw)
    assert abs(c.energy_centered - c.E_var) <= 1e-10 * max(1.0, c.E_var)
    assert abs((c.energy_raw - c.E_var) - c.energy_discrepancy) <= 1e-10 * max(1.0, c.energy_raw)


def test_edge_mass():
    p = np.zeros(100)
    p[50] = 1.0
    assert edge_mass(p) == 0.0
    p = np.full(100, 0.01)
    assert edge_mass(p, 0.05) == pytest.approx(0.10)


def test_stationary_report():
    Hs = HermitianOperator.zeros(QUBIT, Units.ENERGY)
    d, dt = 64, 0.1
    h = history(Hs, StateVector.basis(QUBIT, 0), d, dt)
    report = uncertainty_report(h, EventSpec(Projector.identity(QUBIT), "always"))
    assert report.commuting
    assert report.energy_path == "commuting"
    assert report.t_std == pytest.approx(dt * math.sqrt((d * d - 1) / 12), rel=1e-12)
    assert report.E_std == pytest.approx(0.0, abs=1e-7)
    assert report.boundary_warning
    assert report.warnings


def test_energy_path_disagreement_is_reported(monkeypatch):
    import eventclock.event_statistics as event_statistics

    Hz = qubit_hamiltonian("z")
    h = history(Hz, PLUS, 32, 0.1)
    ev = EventSpec(Projector.identity(QUBIT), "always")
    assert not any("disagree" in w for w in uncertainty_report(h, ev).warnings)

    exact = conditional_energy_history(h, ev)
    shifted = EnergyMoments(E_mean=exact.E_mean + 1e-9, E_std=exact.E_std, path="history")
    monkeypatch.setattr(event_statistics, "conditional_energy_history", lambda *a: shifted)
    report = uncertainty_report(h, ev)
    assert any("disagree" in w for w in report.warnings)
    assert report.E_mean_history == shifted.E_mean


def test_packet_report_saturates_bound():
    s = packet_scenario()
    report = uncertainty_report(s.history(), s.event)
    assert not report.boundary_warning
    assert not report.commuting
    assert report.t_std == pytest.approx(0.5, rel=1e-3)
    assert report.E_mean == pytest.approx(8.0, abs=1e-2)
    assert report.product_conditional >= 0.5 * (1 - 0.01)
    assert report.product_conditional == pytest.approx(0.5, abs=5e-3)
    assert report.product_unconditional >= report.bound_unconditional - 0.02
    assert report.robertson_bound == pytest.approx(0.5, abs=1e-3)
    assert report.alpha_T * report.p_event == pytest.approx(1.0, abs=1e-12)
    assert np.sum(report.p_t_given_event) == pytest.approx(1.0, abs=1e-10)


def test_localized_event_probability_scales_with_window():
    short = packet_scenario(d=512, T_total=16.0)
    long = packet_scenario(d=1024, T_total=32.0)
    p_short = uncertainty_report(short.history(), short.event).p_event
    p_long = uncertainty_report(long.history(), long.event).p_event
    assert p_long * 32.0 == pytest.approx(p_short * 16.0, rel=1e-2)


def test_time_origin_shift_moves_distribution_rigidly():
    base = packet_scenario()
    shift = 64 * base.dt
    moved = packet_scenario(delay=shift)
    r0 = uncertainty_report(base.history(), base.event)
    r1 = uncertainty_report(moved.history(), moved.event)
    assert np.allclose(r1.p_t_given_event, np.roll(r0.p_t_given_event, 64), atol=1e-10)
    assert r1.t_mean == pytest.approx(r0.t_mean + shift, abs=1e-10)
    assert r1.t_std == pytest.approx(r0.t_std, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_uncertainty_chain_on_random_events(seed):
    scenario = oracle_scenario(1000 + seed % 2)
    rng = np.random.default_rng(seed)
    dim = scenario.Hs.space.dimension
    psi0 = StateVector.normalize(scenario.Hs.space, rng.normal(size=dim) + 1j * rng.normal(size=dim))
    h = history(scenario.Hs, psi0, 16, float(rng.uniform(0.05, 0.5)))
    try:
        product, schrodinger, robertson = clock_uncertainty_bounds(h, scenario.event)
        report = uncertainty_report(h, scenario.event)
    except EventNeverHappens:
        return
    assert robertson <= schrodinger * (1 + 1e-9) + 1e-12
    assert schrodinger <= product * (1 + 1e-9) + 1e-12
    assert np.sum(report.p_t_given_event) == pytest.approx(1.0, abs=1e-10)
    p_dense = float(np.vdot(h.joint @ scenario.event.projector.matrix.T,
                            h.joint @ scenario.event.projector.matrix.T).real)
    assert report.p_event == pytest.approx(p_dense, abs=1e-12)
