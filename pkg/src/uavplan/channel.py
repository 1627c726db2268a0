"""Probabilistic line-of-sight air-to-ground channel model.

Path-loss values are linear power ratios. The excess losses on top of
free-space path loss are configured in dB (the convention the published
parameter tables use) and converted to linear factors at evaluation time.
Elevation angles are handled in degrees because the sigmoid shape
parameters (a, b) are calibrated against degrees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s
DEFAULT_CARRIER_HZ = 2.4e9

LOS = "los"
NLOS = "nlos"


@dataclass(frozen=True)
class Environment:
    """LOS-probability and excess-loss parameters of one propagation environment."""

    a: float  # sigmoid shape, dimensionless
    b: float  # sigmoid shape, 1/degree
    eta_los_db: float  # excess loss of LOS links, dB
    eta_nlos_db: float  # excess loss of NLOS links, dB
    carrier_hz: float = DEFAULT_CARRIER_HZ
    name: str = "custom"

    def __post_init__(self):
        if self.a <= 0.0 or self.b <= 0.0:
            raise ValueError("sigmoid parameters a and b must be positive")
        if self.carrier_hz <= 0.0:
            raise ValueError("carrier_hz must be positive")
        # Equality is allowed so that the degenerate "no LOS benefit" case can
        # be modelled; NLOS loss below LOS loss is physically meaningless.
        if self.eta_nlos_db < self.eta_los_db:
            raise ValueError("NLOS excess loss must not be below LOS excess loss")

    @property
    def eta_los(self) -> float:
        """LOS excess loss as a linear power ratio."""
        return 10.0 ** (self.eta_los_db / 10.0)

    @property
    def eta_nlos(self) -> float:
        """NLOS excess loss as a linear power ratio."""
        return 10.0 ** (self.eta_nlos_db / 10.0)

    @property
    def fspl_constant(self) -> float:
        """Free-space factor (4*pi*f_c/c)^2 multiplying squared distance, 1/m^2."""
        k = 4.0 * math.pi * self.carrier_hz / SPEED_OF_LIGHT
        return k * k


@dataclass(frozen=True)
class LinkGeometry:
    """Geometry of one ground-user/UAV link."""

    r_u: float  # ground distance from user to the UAV's projection, m
    h: float  # hovering altitude, m

    def __post_init__(self):
        if self.r_u < 0.0 or self.h < 0.0:
            raise ValueError("link geometry requires r_u >= 0 and h >= 0")

    @property
    def distance(self) -> float:
        """Slant user-to-UAV distance, m."""
        return math.hypot(self.r_u, self.h)


# (a, b, eta_los_db, eta_nlos_db)
_PRESET_TABLE = {
    "suburban": (4.88, 0.43, 0.1, 21.0),
    "urban": (9.61, 0.16, 1.0, 20.0),
    "dense-urban": (12.08, 0.11, 1.6, 23.0),
    "high-rise-urban": (27.23, 0.08, 2.3, 34.0),
}


def canonical_environment_name(name: str) -> str:
    """Normalize an environment name: case, and -/_/space separators."""
    return "-".join(name.strip().lower().replace("-", " ").replace("_", " ").split())


def preset_names() -> tuple[str, ...]:
    return tuple(_PRESET_TABLE)


def preset(name: str, carrier_hz: float = DEFAULT_CARRIER_HZ) -> Environment:
    """Look up a preset environment by name ("Dense Urban" == "dense-urban")."""
    key = canonical_environment_name(name)
    try:
        a, b, eta0, eta1 = _PRESET_TABLE[key]
    except KeyError:
        known = ", ".join(_PRESET_TABLE)
        raise KeyError(f"unknown environment preset {name!r} (known: {known})") from None
    return Environment(a=a, b=b, eta_los_db=eta0, eta_nlos_db=eta1,
                       carrier_hz=carrier_hz, name=key)


# ---------------------------------------------------------------------------
# Vectorized kernels. These accept scalars or numpy arrays for r_u and h and
# perform no validation; the integrators and the Monte-Carlo sampler call
# them on large batches. The public per-link operations below validate.
# ---------------------------------------------------------------------------

def batch_los_probability(env: Environment, r_u, h):
    theta_deg = np.degrees(np.arctan2(h, r_u))
    return 1.0 / (1.0 + env.a * np.exp(-env.b * (theta_deg - env.a)))


def batch_los_probability_altitude_derivative(env: Environment, r_u, h):
    p = batch_los_probability(env, r_u, h)
    return (180.0 * env.b / math.pi) * r_u * p * (1.0 - p) / (r_u * r_u + h * h)


def batch_average_excess(env: Environment, r_u, h):
    """Average excess loss eta1 + P0*(eta0 - eta1), linear."""
    p = batch_los_probability(env, r_u, h)
    return env.eta_nlos + p * (env.eta_los - env.eta_nlos)


def batch_average_path_loss(env: Environment, r_u, h):
    return env.fspl_constant * (r_u * r_u + h * h) * batch_average_excess(env, r_u, h)


# ---------------------------------------------------------------------------
# Per-link operations
# ---------------------------------------------------------------------------

def elevation_angle_deg(geom: LinkGeometry) -> float:
    """Elevation angle of the UAV seen from the user, degrees; 90 overhead."""
    if geom.r_u == 0.0 and geom.h == 0.0:
        raise ValueError("elevation angle undefined at r_u = h = 0")
    return math.degrees(math.atan2(geom.h, geom.r_u))


def los_probability(env: Environment, geom: LinkGeometry) -> float:
    """Probability that the link is line-of-sight, in (0, 1)."""
    if geom.r_u == 0.0 and geom.h == 0.0:
        raise ValueError("LOS probability undefined at r_u = h = 0")
    return float(batch_los_probability(env, geom.r_u, geom.h))


def los_probability_altitude_derivative(env: Environment, geom: LinkGeometry) -> float:
    """d P0 / d h at fixed ground distance, 1/m; always >= 0."""
    if geom.r_u == 0.0 and geom.h == 0.0:
        raise ValueError("LOS probability undefined at r_u = h = 0")
    return float(batch_los_probability_altitude_derivative(env, geom.r_u, geom.h))


def path_loss(env: Environment, geom: LinkGeometry, link: str) -> float:
    """Path loss of a LOS or NLOS link as a linear power ratio."""
    if geom.distance == 0.0:
        raise ValueError("path loss undefined at zero distance")
    if link == LOS:
        eta = env.eta_los
    elif link == NLOS:
        eta = env.eta_nlos
    else:
        raise ValueError(f"link must be {LOS!r} or {NLOS!r}, got {link!r}")
    d = geom.distance
    return env.fspl_constant * d * d * eta


def average_path_loss(env: Environment, geom: LinkGeometry) -> float:
    """LOS-probability-weighted average path loss, linear power ratio."""
    if geom.distance == 0.0:
        raise ValueError("path loss undefined at zero distance")
    return float(batch_average_path_loss(env, geom.r_u, geom.h))
