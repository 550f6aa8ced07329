"""
Report Schema
Pydantic models for every document the tool writes. Reports are validated
against these before they leave the process.
"""

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Provenance(_Strict):
    config_sha256: str
    tool_version: str
    tolerances: dict[str, float | int]


class FiniteDimReport(_Strict):
    kind: Literal["finite_dim"]
    label: str
    d: int
    dt: float
    T_total: float
    p_event: float
    alpha_T: float
    times: list[float]
    p_t_given_event: list[float]
    t_mean: float
    t_std: float
    E_mean: float
    E_std: float
    energy_path: Literal["commuting", "clock"]
    commuting: bool
    commutator_norm: float
    E_mean_clock: float
    E_std_clock: float
    E_mean_history: float | None
    E_std_history: float | None
    delta_Hs: float
    product_conditional: float
    bound_conditional: float
    margin_conditional: float
    product_unconditional: float
    bound_unconditional: float
    margin_unconditional: float
    product_clock: float
    robertson_bound: float
    schrodinger_bound: float
    edge_mass: float
    boundary_warning: bool
    warnings: list[str]


class PhotonArrivalReport(_Strict):
    kind: Literal["photon_arrival"]
    N: int
    d_omega: float
    dt: float
    z0: float
    t0: float
    times: list[float]
    p_t_given_event: list[float]
    window: tuple[float, float]
    t_mean: float
    t_std: float
    E_mean: float
    E_std: float
    product: float
    bound: float
    margin: float
    edge_mass: float
    boundary_warning: bool
    warnings: list[str]


class PhotonFrequencyReport(_Strict):
    kind: Literal["photon_frequency"]
    omega0: float
    omega_bin: float
    d_omega: float
    T_total: float
    p_event: float
    times: list[float]
    p_t_given_event: list[float]
    t_mean: float
    t_std: float
    t_std_window: float
    E_mean: float
    E_std: float
    product: float
    bound: float
    margin: float
    warnings: list[str]


Report = Annotated[
    Union[FiniteDimReport, PhotonArrivalReport, PhotonFrequencyReport],
    Field(discriminator="kind"),
]


class ReportDocument(_Strict):
    units: Literal["hbar=1"]
    scenario: str
    report: Report
    diagnostics: dict
    provenance: Provenance
    generated_at: str


class SweepRowModel(_Strict):
    parameter: str
    value: float
    p_event: float
    t_std: float
    E_std: float
    product: float
    bound: float
    margin: float
    constraint_residual: float | None
    commutator_residual: float | None
    energy_mean_discrepancy: float | None
    energy_std_discrepancy: float | None


class SweepDocument(_Strict):
    units: Literal["hbar=1"]
    scenario: str
    kind: Literal["finite_dim", "photon_arrival", "photon_frequency"]
    parameter: Literal["d", "N", "T_total"]
    rows: list[SweepRowModel]
    flags: dict[str, bool | None]
    provenance: Provenance
    generated_at: str


def report_json_schema() -> dict:
    return ReportDocument.model_json_schema()
