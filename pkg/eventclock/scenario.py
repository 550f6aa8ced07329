"""
Scenario Module
Loads scenario files, builds the objects they describe, and runs single
scenarios and parameter sweeps.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np
import scipy.linalg as la
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .clock_register import build_clock, commutator_residual, gaussian_probe
from .config import Tolerances
from .errors import ConfigError, ContractError, EventClockError, UnreadableConfig
from .event_statistics import EventSpec, centering_diagnostics, uncertainty_report
from .history_state import build_history, constraint_residual, energy_equality_check
from .photon_waveguide import (
    ArrivalEvent,
    SpectralAmplitude,
    frequency_event_report,
    gaussian_spectrum,
    rectangular_spectrum,
    time_bandwidth_report,
    two_peak_spectrum,
)
from .quantum_core import (
    PAULI,
    HermitianOperator,
    HilbertLabel,
    Projector,
    StateVector,
    Units,
)

logger = logging.getLogger(__name__)

SYSTEM_SPACE_NAME = "system"


def parse_complex(value: Any, ndim: int) -> np.ndarray:
    """
    Complex array from its JSON form.

    Accepts plain reals, trailing [re, im] pairs, or {"real": ..., "imag": ...}.
    """
    if isinstance(value, dict):
        if "real" not in value:
            raise ValueError("complex array object needs a 'real' entry")
        real = np.asarray(value["real"], dtype=np.float64)
        imag = np.asarray(value.get("imag", np.zeros_like(real)), dtype=np.float64)
        if real.shape != imag.shape:
            raise ValueError("'real' and 'imag' parts differ in shape")
        arr = real + 1j * imag
    else:
        try:
            raw = np.asarray(value, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise ValueError(f"not a numeric array: {e}") from e
        if raw.ndim == ndim + 1 and raw.shape[-1] == 2:
            arr = raw[..., 0] + 1j * raw[..., 1]
        else:
            arr = raw.astype(np.complex128)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("array has non-finite entries")
    return arr


def _hermitian_deviation(mat: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(mat))))
    return float(np.max(np.abs(mat - mat.conj().T))) / scale


class ClockConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d: int = Field(ge=4)
    dt: float = Field(gt=0)

    @field_validator("d")
    @classmethod
    def _even(cls, v: int) -> int:
        if v % 2:
            raise ValueError("clock dimension must be even")
        return v


class SystemConfig(BaseModel):
    """
    System Hilbert space and Hamiltonian.

    `hamiltonian` is a dense matrix, {"diagonal": [...]}, or a Pauli name
    ("x", "y", "z") for a qubit.
    """

    model_config = ConfigDict(extra="forbid")

    dimension: int = Field(ge=1)
    hamiltonian: Any

    @field_validator("hamiltonian")
    @classmethod
    def _valid_hamiltonian(cls, v, info):
        n = info.data.get("dimension")
        mat = _hamiltonian_matrix(v)
        if n is not None and mat.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got shape {mat.shape}")
        return v

    def matrix(self) -> np.ndarray:
        return _hamiltonian_matrix(self.hamiltonian)


def _hamiltonian_matrix(v) -> np.ndarray:
    if isinstance(v, str):
        key = v.lower().removeprefix("pauli_")
        if key not in PAULI:
            raise ValueError(f"unknown Pauli name '{v}'")
        return PAULI[key].copy()
    if isinstance(v, dict) and "diagonal" in v:
        return np.diag(parse_complex(v["diagonal"], 1).real).astype(np.complex128)
    return parse_complex(v, 2)


class EventConfig(BaseModel):
    """
    The conditioning event.

    finite_dim: `projector` as a matrix or {"onto": [vectors]};
    photon_arrival: `z0`; photon_frequency: `omega0` with `T_total`.
    """

    model_config = ConfigDict(extra="forbid")

    label: str = "event"
    projector: Any = None
    z0: float | None = None
    omega0: float | None = None
    T_total: float | None = Field(None, gt=0)
    samples: int = Field(256, ge=1)
    time_window: tuple[float, float] | None = None

    @field_validator("projector")
    @classmethod
    def _valid_projector(cls, v):
        if v is None:
            return v
        mat = _projector_matrix(v)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"projector must be square, got shape {mat.shape}")
        return v


def _projector_matrix(v) -> np.ndarray:
    if isinstance(v, dict) and "onto" in v:
        q = la.orth(parse_complex(v["onto"], 2).T)
        return q @ q.conj().T
    return parse_complex(v, 2)


class SpectrumConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    shape: Literal["gaussian", "rectangular", "two_peak"] = "gaussian"
    N: int = Field(4096, ge=2)
    d_omega: float = Field(0.01, gt=0)
    omega_min: float = 0.0
    omega0: float | None = None
    sigma: float | None = Field(None, gt=0)
    chirp: float = 0.0
    omega_lo: float | None = None
    omega_hi: float | None = None
    omega_b: float | None = None
    weights: tuple[float, float] = (0.5, 0.5)


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    parameter: Literal["d", "N", "T_total"]
    values: list[float] = Field(min_length=1)


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["finite_dim", "photon_arrival", "photon_frequency"]
    name: str = "scenario"
    clock: ClockConfig | None = None
    system: SystemConfig | None = None
    initial_state: Any = None
    event: EventConfig = Field(default_factory=EventConfig)
    spectrum: SpectrumConfig | None = None
    sweep: SweepConfig | None = None
    seed: int | None = None
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @field_validator("initial_state")
    @classmethod
    def _valid_state(cls, v, info):
        if v is None:
            return v
        amps = parse_complex(v, 1)
        system = info.data.get("system")
        if system is not None and amps.size != system.dimension:
            raise ValueError(
                f"expected {system.dimension} amplitudes, got {amps.size}"
            )
        return v

    @model_validator(mode="after")
    def _within_tolerances(self):
        """Numeric checks, against the tolerances this scenario declares."""
        tol = self.tolerances
        if self.system is not None and _hermitian_deviation(self.system.matrix()) > tol.hermitian:
            raise ConfigError("system.hamiltonian", "matrix is not Hermitian")
        if self.event.projector is not None:
            mat = _projector_matrix(self.event.projector)
            if _hermitian_deviation(mat) > tol.hermitian:
                raise ConfigError("event.projector", "projector is not Hermitian")
            if np.max(np.abs(mat @ mat - mat)) > tol.projector:
                raise ConfigError("event.projector", "projector is not idempotent")
        if self.initial_state is not None:
            norm = float(np.linalg.norm(parse_complex(self.initial_state, 1)))
            if abs(norm - 1.0) > tol.norm:
                raise ConfigError("initial_state", f"state norm is {norm!r}, expected 1")
        return self


def _require(config: ScenarioConfig):
    """Blocks each kind needs, reported with their field path."""
    if config.kind == "finite_dim":
        for name in ("clock", "system", "initial_state"):
            if getattr(config, name) is None:
                raise ConfigError(name, "required for finite_dim scenarios")
        if config.event.projector is None:
            raise ConfigError("event.projector", "required for finite_dim scenarios")
        n = config.system.dimension
        if _projector_matrix(config.event.projector).shape != (n, n):
            raise ConfigError("event.projector", f"expected a {n}x{n} matrix")
    else:
        if config.spectrum is None:
            raise ConfigError("spectrum", f"required for {config.kind} scenarios")
        spec = config.spectrum
        if spec.shape in ("gaussian", "two_peak") and (spec.omega0 is None or spec.sigma is None):
            raise ConfigError("spectrum", f"{spec.shape} spectra need omega0 and sigma")
        if spec.shape == "two_peak" and spec.omega_b is None:
            raise ConfigError("spectrum.omega_b", "required for two_peak spectra")
        if spec.shape == "rectangular" and (spec.omega_lo is None or spec.omega_hi is None):
            raise ConfigError("spectrum", "rectangular spectra need omega_lo and omega_hi")
        if config.kind == "photon_frequency":
            if config.event.omega0 is None:
                raise ConfigError("event.omega0", "required for photon_frequency scenarios")
            if config.event.T_total is None:
                raise ConfigError("event.T_total", "required for photon_frequency scenarios")
    if config.sweep is not None:
        allowed = {"finite_dim": ("d", "T_total"), "photon_arrival": ("N",),
                   "photon_frequency": ("N", "T_total")}[config.kind]
        if config.sweep.parameter not in allowed:
            raise ConfigError(
                "sweep.parameter",
                f"'{config.sweep.parameter}' cannot be swept for {config.kind} scenarios",
            )


def parse_scenario(data: dict) -> ScenarioConfig:
    """Validate a scenario given as parsed JSON."""
    try:
        config = ScenarioConfig.model_validate(data)
    except ValidationError as e:
        err = e.errors()[0]
        cause = err.get("ctx", {}).get("error")
        if isinstance(cause, ConfigError):
            raise cause from e
        loc = ".".join(str(part) for part in err["loc"]) or None
        raise ConfigError(loc, err["msg"]) from e
    _require(config)
    return config


def load_scenario(path: str | Path) -> tuple[ScenarioConfig, bytes]:
    """Read and validate a scenario file; returns the config and the raw bytes."""
    path = Path(path)
    try:
        raw = path.read_bytes()
        data = json.loads(raw)
    except OSError as e:
        raise UnreadableConfig(f"cannot read {path}: {e.strerror or e}") from e
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise UnreadableConfig(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise UnreadableConfig(f"{path} must hold a JSON object")
    logger.info("loaded scenario %s", path)
    return parse_scenario(data), raw


def build_finite_dim(config: ScenarioConfig):
    """(HistoryState, EventSpec) for a finite_dim scenario."""
    tol = config.tolerances
    system = HilbertLabel(SYSTEM_SPACE_NAME, config.system.dimension)
    try:
        Hs = HermitianOperator(system, config.system.matrix(), Units.ENERGY, tol)
    except ContractError as e:
        raise ConfigError("system.hamiltonian", str(e)) from e
    try:
        psi0 = StateVector(system, parse_complex(config.initial_state, 1), tol)
    except ContractError as e:
        raise ConfigError("initial_state", str(e)) from e
    try:
        projector = Projector.from_matrix(system, _projector_matrix(config.event.projector), tol)
    except ContractError as e:
        raise ConfigError("event.projector", str(e)) from e

    clock = build_clock(config.clock.d, config.clock.dt, tol)
    history = build_history(clock, Hs, psi0, tol)
    return history, EventSpec(projector=projector, label=config.event.label)


def build_spectrum(config: ScenarioConfig) -> SpectralAmplitude:
    spec = config.spectrum
    grid = dict(N=spec.N, d_omega=spec.d_omega, omega_min=spec.omega_min)
    if spec.shape == "gaussian":
        return gaussian_spectrum(spec.omega0, spec.sigma, chirp=spec.chirp, **grid)
    if spec.shape == "rectangular":
        return rectangular_spectrum(spec.omega_lo, spec.omega_hi, **grid)
    return two_peak_spectrum(
        spec.omega0, spec.omega_b, spec.sigma, weights=spec.weights, **grid
    )


@dataclass
class ScenarioResult:
    kind: str
    name: str
    report: Any
    diagnostics: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.report.times

    @property
    def distribution(self) -> np.ndarray:
        return self.report.p_t_given_event


# Gaussian width as a fraction of the window; wider states leave tails at the
# edges that wrap around and make the commutator residual grow with d
PROBE_FRACTION = 32.0


def finite_dim_diagnostics(history, ev, tol: Tolerances) -> dict:
    clock = history.clock
    probe_width = clock.T_total / PROBE_FRACTION
    return {
        "constraint_residual": constraint_residual(history),
        "energy_equality": energy_equality_check(history).to_dict(),
        "centering": centering_diagnostics(history, ev, tol).to_dict(),
        "probe_width": probe_width,
        "commutator_residual": commutator_residual(clock, gaussian_probe(clock, probe_width)),
    }


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    tol = config.tolerances
    if config.kind == "finite_dim":
        history, ev = build_finite_dim(config)
        report = uncertainty_report(history, ev, tol)
        diagnostics = finite_dim_diagnostics(history, ev, tol)
    elif config.kind == "photon_arrival":
        phi = build_spectrum(config)
        ev = ArrivalEvent(z0=config.event.z0 or 0.0)
        report = time_bandwidth_report(phi, ev, config.event.time_window, tol)
        diagnostics = {}
    else:
        phi = build_spectrum(config)
        report = frequency_event_report(
            phi, config.event.omega0, config.event.T_total, config.event.samples, tol
        )
        diagnostics = {}
    logger.info(
        "scenario '%s' (%s): product %.6g", config.name, config.kind,
        getattr(report, "product_conditional", getattr(report, "product", math.nan)),
    )
    return ScenarioResult(kind=config.kind, name=config.name, report=report, diagnostics=diagnostics)


def with_parameter(config: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    """Copy of `config` with one swept parameter replaced."""
    if parameter == "d":
        d = int(value)
        T_total = config.clock.d * config.clock.dt
        clock = config.clock.model_copy(update={"d": d, "dt": T_total / d})
        return config.model_copy(update={"clock": clock})
    if parameter == "N":
        spectrum = config.spectrum.model_copy(update={"N": int(value)})
        return config.model_copy(update={"spectrum": spectrum})
    if parameter == "T_total":
        if config.kind == "finite_dim":
            d = 2 * max(2, int(round(value / config.clock.dt / 2)))
            clock = config.clock.model_copy(update={"d": d})
            return config.model_copy(update={"clock": clock})
        event = config.event.model_copy(update={"T_total": float(value)})
        return config.model_copy(update={"event": event})
    raise ContractError(f"unknown sweep parameter '{parameter}'")


@dataclass
class SweepRow:
    parameter: str
    value: float
    p_event: float
    t_std: float
    E_std: float
    product: float
    bound: float
    margin: float
    constraint_residual: float | None = None
    commutator_residual: float | None = None
    energy_mean_discrepancy: float | None = None
    energy_std_discrepancy: float | None = None


@dataclass
class SweepResult:
    name: str
    kind: str
    parameter: str
    rows: list[SweepRow]
    flags: dict[str, bool | None]


def _sweep_row(config: ScenarioConfig, parameter: str, value: float) -> SweepRow:
    result = run_scenario(with_parameter(config, parameter, value))
    r = result.report
    if result.kind == "finite_dim":
        diag = result.diagnostics
        return SweepRow(
            parameter=parameter,
            value=value,
            p_event=r.p_event,
            t_std=r.t_std,
            E_std=r.E_std,
            product=r.product_conditional,
            bound=r.bound_conditional,
            margin=r.margin_conditional,
            constraint_residual=diag["constraint_residual"],
            commutator_residual=diag["commutator_residual"],
            energy_mean_discrepancy=diag["energy_equality"]["mean_discrepancy"],
            energy_std_discrepancy=diag["energy_equality"]["std_discrepancy"],
        )
    return SweepRow(
        parameter=parameter,
        value=value,
        p_event=getattr(r, "p_event", 1.0),
        t_std=r.t_std,
        E_std=r.E_std,
        product=r.product,
        bound=r.bound,
        margin=r.margin,
    )


def non_increasing(values, slack: float, floor: float) -> bool:
    """Each value at most (1 + slack) times the previous one, plus floor."""
    return all(b <= (1.0 + slack) * a + floor for a, b in zip(values, values[1:]))


def non_decreasing(values, slack: float, floor: float) -> bool:
    return all(b >= a - slack * abs(a) - floor for a, b in zip(values, values[1:]))


def sweep_flags(kind: str, rows: list[SweepRow], tol: Tolerances) -> dict[str, bool | None]:
    """Convergence flags for a sweep; recorded, never enforced."""
    slack, floor = tol.sweep_slack, tol.convergence_floor
    margins = [row.margin for row in rows]
    if kind == "photon_arrival":
        margin_improving = non_increasing([abs(m) for m in margins], 0.0, floor)
    else:
        margin_improving = non_decreasing(margins, slack, floor)
    flags = {"margin_improving": margin_improving, "residual_decreasing": None,
             "commutator_residual_decreasing": None, "energy_equality_improving": None}
    if kind == "finite_dim":
        flags["residual_decreasing"] = non_increasing(
            [row.constraint_residual for row in rows], slack, floor
        )
        flags["commutator_residual_decreasing"] = non_increasing(
            [row.commutator_residual for row in rows], slack, floor
        )
        flags["energy_equality_improving"] = non_increasing(
            [row.energy_mean_discrepancy for row in rows], slack, floor
        ) and non_increasing([row.energy_std_discrepancy for row in rows], slack, floor)
    return flags


def sweep_scenario(config: ScenarioConfig, jobs: int = 1) -> SweepResult:
    """Run every swept value; rows follow the order of the values in the config."""
    if config.sweep is None:
        raise ConfigError("sweep", "scenario has no sweep block")
    parameter = config.sweep.parameter
    values = config.sweep.values

    def evaluate(value):
        try:
            return _sweep_row(config, parameter, value)
        except EventClockError:
            logger.info("sweep point %s=%s failed", parameter, value)
            raise

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(evaluate, values))
    else:
        rows = [evaluate(v) for v in values]

    flags = sweep_flags(config.kind, rows, config.tolerances)
    for name, ok in flags.items():
        if ok is False:
            logger.warning("sweep '%s': %s check failed", config.name, name)
    return SweepResult(
        name=config.name, kind=config.kind, parameter=parameter, rows=rows, flags=flags
    )
