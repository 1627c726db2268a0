"""Scenario files: JSON schema, validation, and conversion to planner types.

A scenario is the single input document for planning and simulation: the
carrier, any custom environments, the subregions with their densities, the
per-user service contract, and optional solver settings. Powers in files
are dB (normalized by noise power) and converted at this boundary; all
distances are meters and densities users/m^2.
"""
from __future__ import annotations

import json
import math
import os
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .altitude import BisectionConfig
from .channel import (
    DEFAULT_CARRIER_HZ,
    Environment,
    canonical_environment_name,
    preset,
    preset_names,
)
from .layout import Rect
from .montecarlo import SimConfig
from .placement import Subregion
from .power import QuadratureConfig, ServiceParams

QUAD_TOL_ENV_VAR = "UAVPLAN_QUAD_TOL"


class ScenarioError(ValueError):
    """A scenario file failed validation; the message names the field."""


class EnvironmentSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    a: float = Field(gt=0)
    b: float = Field(gt=0)
    eta_los_db: float
    eta_nlos_db: float


class GeometrySpec(BaseModel):
    """Optional rectangle for layout generation, meters."""

    model_config = ConfigDict(extra="forbid")

    x0: float = 0.0
    y0: float = 0.0
    width: float = Field(ge=0)
    height: float = Field(ge=0)


class SubregionSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: str
    density_per_m2: float = Field(ge=0)
    environment: str
    area_m2: Optional[float] = Field(default=None, gt=0)
    area_over_pi_eb: Optional[float] = Field(default=None, gt=0)
    geometry: Optional[GeometrySpec] = None

    @model_validator(mode="after")
    def _one_area_form(self):
        if (self.area_m2 is None) == (self.area_over_pi_eb is None):
            raise ValueError("exactly one of area_m2 or area_over_pi_eb is required")
        return self


class ServiceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rate_su: float = Field(gt=0)
    # dB cannot express zero power; null means exactly zero circuit power.
    circuit_power_db: Optional[float]
    battery_j: float = Field(default=1.0, gt=0)


class SolverSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    epsilon: float = Field(default=1e-3, gt=0)
    rel_tol: float = Field(default=1e-9, gt=0)
    trials: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0)


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: int
    carrier_hz: float = Field(default=DEFAULT_CARRIER_HZ, gt=0)
    environments: dict[str, EnvironmentSpec] = Field(default_factory=dict)
    subregions: list[SubregionSpec] = Field(min_length=1)
    service: ServiceSpec
    solver: SolverSpec = Field(default_factory=SolverSpec)

    @model_validator(mode="after")
    def _check_version(self):
        if self.version != 1:
            raise ValueError("version must be 1")
        return self


def _format_validation_error(err: ValidationError) -> str:
    first = err.errors()[0]
    loc = ".".join(str(part) for part in first["loc"]) or "scenario"
    return f"{loc}: {first['msg']}"


def parse_scenario(data: dict) -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as err:
        raise ScenarioError(_format_validation_error(err)) from err


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ScenarioError(f"cannot read scenario file: {err}") from err
    except json.JSONDecodeError as err:
        raise ScenarioError(f"scenario is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ScenarioError("scenario: top level must be a JSON object")
    return parse_scenario(data)


# ---------------------------------------------------------------------------
# Conversion to planner types
# ---------------------------------------------------------------------------

def resolve_environment(scn: Scenario, name: str) -> Environment:
    """Resolve by name against the scenario's custom table, then the presets."""
    key = canonical_environment_name(name)
    customs = {canonical_environment_name(k): v for k, v in scn.environments.items()}
    if key in customs:
        spec = customs[key]
        try:
            return Environment(a=spec.a, b=spec.b, eta_los_db=spec.eta_los_db,
                               eta_nlos_db=spec.eta_nlos_db,
                               carrier_hz=scn.carrier_hz, name=key)
        except ValueError as err:
            raise ScenarioError(f"environments.{name}: {err}") from err
    try:
        return preset(key, carrier_hz=scn.carrier_hz)
    except KeyError:
        known = ", ".join(list(customs) + list(preset_names()))
        raise ScenarioError(
            f"subregion environment {name!r} is not defined (known: {known})") from None


def build_subregions(scn: Scenario) -> list[Subregion]:
    subs = []
    for spec in scn.subregions:
        env = resolve_environment(scn, spec.environment)
        if spec.area_m2 is not None:
            area = spec.area_m2
        else:
            # area/(pi*E_b) given directly: reconstruct the area under the
            # scenario's battery capacity so counts and hover times stay
            # consistent with the recall-frequency prefactor.
            area = spec.area_over_pi_eb * math.pi * scn.service.battery_j
        subs.append(Subregion(label=spec.label, area_m2=area,
                              density=spec.density_per_m2, env=env))
    return subs


def subregion_rect(spec: SubregionSpec) -> Rect | None:
    if spec.geometry is None:
        return None
    g = spec.geometry
    return Rect(x0=g.x0, y0=g.y0, width=g.width, height=g.height)


def build_service(scn: Scenario) -> ServiceParams:
    db = scn.service.circuit_power_db
    circuit = 0.0 if db is None else 10.0 ** (db / 10.0)
    return ServiceParams(rate_su=scn.service.rate_su, circuit_power=circuit,
                         battery_j=scn.service.battery_j)


def quadrature_with_override(rel_tol: float = 1e-9) -> QuadratureConfig:
    """Quadrature settings, honouring the UAVPLAN_QUAD_TOL env override."""
    override = os.environ.get(QUAD_TOL_ENV_VAR)
    if override:
        try:
            rel_tol = float(override)
        except ValueError:
            raise ScenarioError(
                f"{QUAD_TOL_ENV_VAR} must be a number, got {override!r}") from None
        if rel_tol <= 0.0:
            raise ScenarioError(f"{QUAD_TOL_ENV_VAR} must be positive")
    return QuadratureConfig(rel_tol=rel_tol)


def build_quadrature(scn: Scenario) -> QuadratureConfig:
    return quadrature_with_override(scn.solver.rel_tol)


def build_bisection(scn: Scenario) -> BisectionConfig:
    return BisectionConfig(epsilon=scn.solver.epsilon)


def build_sim(scn: Scenario, trials: int | None = None,
              seed: int | None = None) -> SimConfig:
    return SimConfig(trials=scn.solver.trials if trials is None else trials,
                     seed=scn.solver.seed if seed is None else seed)
