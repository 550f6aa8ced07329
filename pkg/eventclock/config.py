"""
Tolerance Configuration
Every numeric threshold used by the library lives in one record.
"""

from pydantic import BaseModel, ConfigDict, Field


class Tolerances(BaseModel):
    """Numeric tolerances and caps. Scenario files may override any subset."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    norm: float = Field(1e-12, gt=0)
    hermitian: float = Field(1e-12, gt=0)
    projector: float = Field(1e-10, gt=0)
    expectation_imag: float = Field(1e-10, gt=0)
    commutator_gate: float = Field(1e-10, gt=0)
    p_floor: float = Field(1e-12, ge=0)
    max_joint_dim: int = Field(2**20, ge=1)
    oracle_max_dim: int = Field(2**14, ge=1)

    # Validity envelope of the clock: fraction of the grid at each end, and the
    # conditional mass allowed there before an event is flagged.
    edge_fraction: float = Field(0.05, gt=0, lt=0.5)
    edge_mass: float = Field(0.01, gt=0, lt=1)

    theorem_slack: float = Field(0.02, ge=0)
    sweep_slack: float = Field(0.10, ge=0)
    convergence_floor: float = Field(1e-9, ge=0)

    def merged(self, **overrides) -> "Tolerances":
        """Return a copy with the given fields replaced."""
        return self.model_copy(update=overrides)


DEFAULT_TOLERANCES = Tolerances()
