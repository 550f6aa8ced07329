"""
Verification Module
Random scenario generators, the fixed oracle corpus, reference scenarios
with closed forms, and the randomized property suite.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clock_register import build_clock
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import EventNeverHappens
from .event_statistics import (
    BOUND_CONDITIONAL,
    EventSpec,
    centering_diagnostics,
    uncertainty_report,
)
from .history_state import HistoryState, build_history
from .quantum_core import (
    PAULI,
    HermitianOperator,
    HilbertLabel,
    Projector,
    StateVector,
    Units,
)

logger = logging.getLogger(__name__)

ORACLE_CORPUS_SEEDS = tuple(range(1000, 1025))


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    d: int
    dt: float
    Hs: HermitianOperator
    psi0: StateVector
    event: EventSpec

    def history(self, tol: Tolerances | None = None) -> HistoryState:
        return build_history(build_clock(self.d, self.dt, tol), self.Hs, self.psi0, tol)


def random_hermitian(rng: np.random.Generator, n: int, norm: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix with spectral norm `norm`."""
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (a + a.conj().T)
    return h * (norm / np.linalg.norm(h, 2))


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_projector(rng: np.random.Generator, space: HilbertLabel, rank: int) -> Projector:
    vecs = rng.normal(size=(rank, space.dimension)) + 1j * rng.normal(size=(rank, space.dimension))
    return Projector.onto(space, vecs)


def random_scenario(
    rng: np.random.Generator, dim: int, d: int = 512, max_norm: float = 5.0, rank: int | None = None
) -> Scenario:
    """Random Hs with |Hs| <= max_norm, random state and rank-1 or rank-2 event."""
    space = HilbertLabel("system", dim)
    norm = float(rng.uniform(0.5, max_norm))
    Hs = HermitianOperator(space, random_hermitian(rng, dim, norm), Units.ENERGY)
    rank = rank or int(rng.integers(1, min(2, dim) + 1))
    return Scenario(
        name=f"random_{dim}",
        d=d,
        dt=0.05 / norm,
        Hs=Hs,
        psi0=StateVector(space, random_state(rng, dim)),
        event=EventSpec(random_projector(rng, space, rank), f"rank{rank}"),
    )


def packet_scenario(
    levels: int = 48,
    spacing: float = 0.25,
    omega0: float = 8.0,
    sigma: float = 1.0,
    delay: float = 0.0,
    d: int = 512,
    T_total: float = 16.0,
) -> Scenario:
    """
    Many-level system prepared in a Gaussian superposition of equally spaced
    levels; the event is detection in the uniform superposition.

    The detection amplitude is a Gaussian pulse in time of width 1/(2 sigma)
    centered at `delay`, well inside the clock window. It is the finite
    register analog of a transform-limited photon hitting a screen.
    """
    space = HilbertLabel("system", levels)
    omegas = omega0 + (np.arange(levels) - levels // 2) * spacing
    Hs = HermitianOperator(space, np.diag(omegas).astype(np.complex128), Units.ENERGY)
    amps = np.exp(-((omegas - omega0) ** 2) / (4.0 * sigma**2) + 1j * omegas * delay)
    psi0 = StateVector.normalize(space, amps)
    event = EventSpec(Projector.onto(space, np.ones((1, levels))), "detected")
    return Scenario(name="packet", d=d, dt=T_total / d, Hs=Hs, psi0=psi0, event=event)


def rabi_scenario(d: int = 32, T_total: float = 4.0 * math.pi) -> Scenario:
    """Hs = sigma_x, psi0 = |0>, event |1><1|: p(t, Π) = sin^2(t) / d."""
    space = HilbertLabel("system", 2)
    Hs = HermitianOperator(space, PAULI["x"], Units.ENERGY)
    event = EventSpec(Projector.onto(space, [[0, 1]]), "spin_flipped")
    return Scenario("rabi_qubit", d, T_total / d, Hs, StateVector.basis(space, 0), event)


def oracle_scenario(seed: int) -> Scenario:
    """
    Corpus member for the dense oracle: d in {8, 16, 32}, system dimension
    in {2, 3, 4}. Even seeds draw a generic non-commuting event; odd seeds a
    diagonal Hs with an event spanning two distinct levels.
    """
    rng = np.random.default_rng(seed)
    d = int(rng.choice([8, 16, 32]))
    dim = int(rng.integers(2, 5))
    space = HilbertLabel("system", dim)
    if seed % 2 == 0:
        norm = float(rng.uniform(0.5, 2.0))
        Hs = HermitianOperator(space, random_hermitian(rng, dim, norm), Units.ENERGY)
        event = EventSpec(random_projector(rng, space, int(rng.integers(1, dim))), "generic")
    else:
        levels = np.sort(rng.uniform(-2.0, 2.0, size=dim))
        Hs = HermitianOperator(space, np.diag(levels).astype(np.complex128), Units.ENERGY)
        chosen = rng.choice(dim, size=2, replace=False)
        basis = np.eye(dim)[chosen]
        event = EventSpec(Projector.onto(space, basis), "levels")
    dt = float(rng.uniform(0.05, 0.3))
    psi0 = StateVector(space, random_state(rng, dim))
    return Scenario(f"oracle_{seed}", d, dt, Hs, psi0, event)


@dataclass
class TrialOutcome:
    index: int
    family: str
    clean: bool
    product_conditional: float
    margin_unconditional: float
    violations: list[str] = field(default_factory=list)


@dataclass
class PropertySuiteResult:
    seed: int
    trials: int
    clean: int
    flagged: int
    skipped: int
    min_product: float | None
    min_margin_unconditional: float | None
    violations: list[str]
    families: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "clean": self.clean,
            "flagged": self.flagged,
            "skipped": self.skipped,
            "min_product": self.min_product,
            "min_margin_unconditional": self.min_margin_unconditional,
            "families": {name: dict(summary) for name, summary in self.families.items()},
            "violations": list(self.violations),
        }


FAMILIES = ("qubit", "qutrit", "packet")


def _trial_scenario(seed: int, index: int, d: int) -> tuple[str, Scenario]:
    rng = np.random.default_rng([seed, index])
    family = FAMILIES[index % len(FAMILIES)]
    if family == "packet":
        return family, packet_scenario(
            spacing=float(rng.uniform(0.2, 0.3)),
            sigma=float(rng.uniform(0.6, 1.0)),
            delay=float(rng.uniform(-2.0, 2.0)),
            d=d,
        )
    return family, random_scenario(rng, 2 if family == "qubit" else 3, d=d)


def check_report(report, centering, tol: Tolerances) -> list[str]:
    """Invariants that hold for every event, clean or not."""
    problems = []
    total = float(np.sum(report.p_t_given_event))
    if abs(total - 1.0) > 1e-10:
        problems.append(f"conditional distribution sums to {total!r}")
    if abs(report.alpha_T * report.p_event - 1.0) > 1e-12:
        problems.append("alpha_T * p_event != 1")
    if report.schrodinger_bound > report.product_clock * (1 + 1e-9) + 1e-12:
        problems.append("Schrodinger bound exceeds the clock product")
    if report.robertson_bound > report.schrodinger_bound * (1 + 1e-9) + 1e-12:
        problems.append("Robertson bound exceeds the Schrodinger bound")
    if abs(centering.time_centered - centering.t_var) > 1e-10 * max(1.0, centering.t_var):
        problems.append("time centering identity fails")
    if abs(centering.energy_centered - centering.E_var) > 1e-10 * max(1.0, centering.E_var):
        problems.append("energy centering identity fails")
    gap = centering.time_raw - centering.t_var
    if abs(gap - centering.time_discrepancy) > 1e-10 * max(1.0, centering.time_raw):
        problems.append("uncentered time discrepancy does not match <T_pi>^2 (1-p)/p^2")
    return problems


def check_theorems(report, tol: Tolerances) -> list[str]:
    """Conditional and unconditional uncertainty bounds."""
    problems = []
    if report.product_conditional < BOUND_CONDITIONAL * (1.0 - tol.theorem_slack):
        problems.append(f"conditional product {report.product_conditional:.6g} below 1/2")
    if report.product_unconditional < report.bound_unconditional - tol.theorem_slack:
        problems.append(
            f"unconditional product {report.product_unconditional:.6g} below "
            f"{report.bound_unconditional:.6g}"
        )
    return problems


def run_trial(seed: int, index: int, d: int = 512, tol: Tolerances | None = None) -> TrialOutcome | None:
    tol = tol or DEFAULT_TOLERANCES
    family, scenario = _trial_scenario(seed, index, d)
    h = scenario.history(tol)
    try:
        report = uncertainty_report(h, scenario.event, tol)
    except EventNeverHappens:
        logger.debug("trial %d: event never happens", index)
        return None
    problems = check_report(report, centering_diagnostics(h, scenario.event, tol), tol)
    problems += check_theorems(report, tol)
    clean = not report.boundary_warning
    return TrialOutcome(
        index=index,
        family=family,
        clean=clean,
        product_conditional=report.product_conditional,
        margin_unconditional=report.margin_unconditional,
        violations=[f"trial {index} ({family}): {p}" for p in problems],
    )


def run_property_suite(
    seed: int = 0, trials: int = 100, d: int = 512, jobs: int = 1, tol: Tolerances | None = None
) -> PropertySuiteResult:
    """
    Randomized qubit, qutrit and wavepacket scenarios.

    Trial i draws from default_rng([seed, i]), so results do not depend on
    `jobs`. Both bounds are checked on every trial; edge-flagged events are
    counted separately from clean ones, overall and per family.
    """
    tol = tol or DEFAULT_TOLERANCES

    def trial(i):
        return run_trial(seed, i, d, tol)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(trial, range(trials)))
    else:
        outcomes = [trial(i) for i in range(trials)]

    done = [o for o in outcomes if o is not None]
    clean = [o for o in done if o.clean]
    violations = [v for o in done for v in o.violations]
    for v in violations:
        logger.warning(v)
    return PropertySuiteResult(
        seed=seed,
        trials=trials,
        clean=len(clean),
        flagged=len(done) - len(clean),
        skipped=trials - len(done),
        min_product=min((o.product_conditional for o in done), default=None),
        min_margin_unconditional=min((o.margin_unconditional for o in done), default=None),
        violations=violations,
        families={name: _family_summary([o for o in done if o.family == name]) for name in FAMILIES},
    )


def _family_summary(outcomes: list[TrialOutcome]) -> dict:
    return {
        "checked": len(outcomes),
        "clean": sum(o.clean for o in outcomes),
        "min_product": min((o.product_conditional for o in outcomes), default=None),
        "min_margin_unconditional": min(
            (o.margin_unconditional for o in outcomes), default=None
        ),
    }
