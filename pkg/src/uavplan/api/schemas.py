"""Request and response models shared by the HTTP service and the CLI client."""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..scenario import Scenario


class RangeSpec(BaseModel):
    """Inclusive arithmetic range start:stop:step."""

    model_config = ConfigDict(extra="forbid")

    start: float = Field(ge=0)
    stop: float
    step: float = Field(gt=0)

    @model_validator(mode="after")
    def _ordered(self):
        if self.stop < self.start:
            raise ValueError("stop must be >= start")
        return self

    def points(self) -> list[float]:
        n = int((self.stop - self.start) / self.step + 1e-9) + 1
        return [self.start + i * self.step for i in range(n)]


# --- plan ------------------------------------------------------------------

class PlanRequest(BaseModel):
    scenario: Scenario


class SubregionPlanModel(BaseModel):
    label: str
    environment: str
    r_b_star_m: float
    h_star_m: float
    h_n_star: float
    n_uav: Optional[float]
    n_uav_ceil: Optional[int]  # derived operator convenience, not the objective
    p_t: float
    p_s: float
    t_h_s: Optional[float]
    phi_per_s: float
    phi_lower_bound_per_s: float
    circuit_balance_residual: Optional[float]
    degenerate: bool


class CalibrationModel(BaseModel):
    reference: dict
    computed_r_b_star_m: float
    discrepancy_factor: float
    status: Literal["CONFIRMED", "DISCREPANT"]
    pc_ratio_chain: dict
    density_ratio_chain: dict
    convention: list[str]


class PlanResponse(BaseModel):
    subregions: list[SubregionPlanModel]
    phi_total_per_s: float
    calibration: CalibrationModel


# --- kernel ----------------------------------------------------------------

class KernelRequest(BaseModel):
    environment: str = "urban"
    carrier_hz: float = Field(default=2.4e9, gt=0)
    range: RangeSpec


class KernelRow(BaseModel):
    h_n: float
    gamma: float
    dgamma_dhn: float


class KernelResponse(BaseModel):
    environment: str
    rows: list[KernelRow]


# --- sweep -----------------------------------------------------------------

class SweepRequest(BaseModel):
    scenario: Scenario
    parameter: Literal["pc_db", "density", "rate"]
    values: list[float] = Field(min_length=1)
    radii: RangeSpec
    label: Optional[str] = None  # subregion to sweep; defaults to the first


class SweepRow(BaseModel):
    param_value: float
    r_b: float
    phi: float


class SweepLocusRow(BaseModel):
    param_value: float
    r_b_star: float
    phi_star: float


class SweepResponse(BaseModel):
    parameter: str
    rows: list[SweepRow]
    locus: list[SweepLocusRow]


# --- contour ---------------------------------------------------------------

class ContourRequest(BaseModel):
    environment: str = "urban"
    carrier_hz: float = Field(default=2.4e9, gt=0)
    power_db: float
    density_per_m2: float = Field(default=0.1, gt=0)
    rate_su: float = Field(default=1.0, gt=0)
    radii: RangeSpec


class ContourRow(BaseModel):
    r_b: float
    h_low: float
    h_high: float
    h_opt: float


class ContourResponse(BaseModel):
    environment: str
    power_db: float
    rows: list[ContourRow]


# --- simulate --------------------------------------------------------------

class SimulateRequest(BaseModel):
    scenario: Scenario
    trials: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)


class SubregionSimModel(BaseModel):
    label: str
    r_b_star_m: float
    h_star_m: float
    analytic_p_t: float
    mean_p_t: float
    stderr_p_t: float
    z_score: float
    within_3_sigma: bool
    mean_users: float
    expected_users: float
    empirical_phi_per_s: float
    analytic_phi_per_s: float


class SimulateResponse(BaseModel):
    trials: int
    seed: int
    subregions: list[SubregionSimModel]
    all_within_3_sigma: bool


# --- layout ----------------------------------------------------------------

class LayoutRequest(BaseModel):
    scenario: Scenario


class LayoutRow(BaseModel):
    label: str
    cx: float
    cy: float
    r_b: float
    h: float


class LayoutCount(BaseModel):
    label: str
    lattice_count: int
    disk_model_count: float
    deviation: float  # lattice/disk - 1


class LayoutResponse(BaseModel):
    rows: list[LayoutRow]
    counts: list[LayoutCount]


# --- environments ----------------------------------------------------------

class EnvironmentModel(BaseModel):
    name: str
    a: float
    b: float
    eta_los_db: float
    eta_nlos_db: float


class EnvironmentsResponse(BaseModel):
    presets: list[EnvironmentModel]
