"""Per-subregion optimal coverage radius, altitude, and recall frequency.

The recall frequency of a subregion is the rate at which its active UAVs
drain batteries and must be swapped: UAV count times total consumed power
over battery capacity. Minimizing it decouples per subregion, and the
optimal radius balances transmit power against circuit power exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .altitude import (
    DEFAULT_BISECTION,
    BisectionConfig,
    cached_normalized_altitude,
)
from .channel import Environment, preset
from .power import (
    DEFAULT_QUADRATURE,
    KernelSolution,
    QuadratureConfig,
    ServiceParams,
    total_transmit_power,
)


class DegenerateDensity(RuntimeError):
    """Zero user density with positive circuit power: unbounded optimal radius."""


@dataclass(frozen=True)
class Subregion:
    """A zone with homogeneous traffic statistics and one environment."""

    label: str
    area_m2: float
    density: float  # mean user density, users/m^2
    env: Environment

    def __post_init__(self):
        if self.area_m2 <= 0.0:
            raise ValueError("area_m2 must be positive")
        if self.density < 0.0:
            raise ValueError("density must be >= 0")


@dataclass(frozen=True)
class SubregionPlan:
    """Planned placement and energy figures for one subregion."""

    label: str
    env_name: str
    r_b_star: float  # optimal coverage radius, m
    h_star: float  # optimal hovering altitude, m
    h_n_star: float  # altitude-to-radius ratio
    n_uav: float | None  # fractional UAV count; None when degenerate
    p_t: float  # transmit power at the optimum, noise-normalized
    p_s: float  # total consumed power, noise-normalized
    t_h: float | None  # hover time per battery, s; None when degenerate
    phi: float  # recall frequency, 1/s
    phi_lower_bound: float  # closed-form minimum of the recall frequency
    circuit_balance_residual: float | None  # |p_t - P_c| / P_c; None when P_c = 0
    degenerate: bool = False


@dataclass(frozen=True)
class PlacementPlan:
    subregions: tuple[SubregionPlan, ...]
    phi_total: float


def uav_count(area_m2: float, r_b: float) -> float:
    """Number of coverage disks tiling the area, as a real ratio."""
    if area_m2 <= 0.0:
        raise ValueError("area_m2 must be positive")
    if r_b <= 0.0:
        raise ValueError("r_b must be positive")
    return area_m2 / (math.pi * r_b * r_b)


def recall_frequency(sub: Subregion, r_b: float, params: ServiceParams,
                     sol: KernelSolution) -> float:
    """Recall frequency of a subregion covered with radius r_b, 1/s.

    Evaluates the transmit power through the kernel at the optimal altitude
    for that radius; convex in r_b**2 with a unique minimum.
    """
    if r_b <= 0.0:
        raise ValueError("r_b must be positive")
    transmit = sub.density * params.rate_factor * sol.gamma_at_opt * r_b * r_b
    return (sub.area_m2 / (math.pi * params.battery_j)) * (
        transmit + params.circuit_power / (r_b * r_b))


def optimal_radius(sub: Subregion, params: ServiceParams, sol: KernelSolution) -> float:
    """Coverage radius minimizing the recall frequency, m.

    Zero circuit power degenerates to zero radius (users served from
    directly overhead); zero density with positive circuit power has no
    finite optimum and raises DegenerateDensity.
    """
    if params.circuit_power == 0.0:
        return 0.0
    if sub.density == 0.0:
        raise DegenerateDensity(
            f"subregion {sub.label!r}: zero user density with positive circuit power "
            f"has an unbounded optimal radius")
    return (params.circuit_power
            / (sub.density * params.rate_factor * sol.gamma_at_opt)) ** 0.25


def optimal_recall_frequency(sub: Subregion, params: ServiceParams,
                             sol: KernelSolution) -> float:
    """Minimum recall frequency of the subregion, 1/s."""
    if params.circuit_power == 0.0:
        return 0.0
    r_star = optimal_radius(sub, params, sol)
    return (2.0 * sub.area_m2 / (math.pi * params.battery_j)) * (
        sub.density * params.rate_factor * r_star * r_star * sol.gamma_at_opt)


def recall_frequency_lower_bound(sub: Subregion, params: ServiceParams,
                                 sol: KernelSolution) -> float:
    """Closed-form floor of the recall frequency over all radii, 1/s."""
    return (2.0 * sub.area_m2 / (math.pi * params.battery_j)) * math.sqrt(
        sub.density * params.rate_factor * params.circuit_power * sol.gamma_at_opt)


def plan_subregion(sub: Subregion, params: ServiceParams, sol: KernelSolution,
                   quad: QuadratureConfig = DEFAULT_QUADRATURE) -> SubregionPlan:
    """Solve one subregion; transmit power is re-derived by direct quadrature
    so the circuit-balance residual is a genuine cross-check, not an identity."""
    if params.circuit_power == 0.0:
        return SubregionPlan(
            label=sub.label, env_name=sub.env.name,
            r_b_star=0.0, h_star=0.0, h_n_star=sol.h_n_star,
            n_uav=None, p_t=0.0, p_s=0.0, t_h=None,
            phi=0.0, phi_lower_bound=0.0,
            circuit_balance_residual=None, degenerate=True)

    r_star = optimal_radius(sub, params, sol)
    h_star = r_star * sol.h_n_star
    p_t = total_transmit_power(sub.env, r_star, sub.density, h_star, params, quad)
    p_s = p_t + params.circuit_power
    phi = recall_frequency(sub, r_star, params, sol)
    return SubregionPlan(
        label=sub.label, env_name=sub.env.name,
        r_b_star=r_star, h_star=h_star, h_n_star=sol.h_n_star,
        n_uav=uav_count(sub.area_m2, r_star),
        p_t=p_t, p_s=p_s, t_h=params.battery_j / p_s,
        phi=phi, phi_lower_bound=recall_frequency_lower_bound(sub, params, sol),
        circuit_balance_residual=abs(p_t - params.circuit_power) / params.circuit_power,
        degenerate=False)


def plan_area(subs: list[Subregion], params: ServiceParams,
              cfg: BisectionConfig = DEFAULT_BISECTION,
              quad: QuadratureConfig = DEFAULT_QUADRATURE) -> PlacementPlan:
    """Plan every subregion and total the recall frequency.

    The kernel solve is memoized per distinct environment, so areas sharing
    an environment pay for one bisection regardless of subregion count.
    """
    if not subs:
        raise ValueError("subregion list must not be empty")
    records = []
    for sub in subs:
        sol = cached_normalized_altitude(sub.env, cfg, quad)
        try:
            records.append(plan_subregion(sub, params, sol, quad))
        except DegenerateDensity:
            raise
        except Exception as exc:
            raise type(exc)(f"subregion {sub.label!r}: {exc}") from exc
    return PlacementPlan(subregions=tuple(records),
                         phi_total=math.fsum(r.phi for r in records))


# Published operating point used to sanity-check the unit conventions: an
# urban zone at 0.1 users/m^2 and 100 dB circuit power is reported to have a
# 327.3 m optimal radius, stepping by 10**(1/4) per +10 dB of circuit power
# and by density**(-1/4) with crowding.
CALIBRATION_REFERENCE = {
    "environment": "urban",
    "carrier_hz": 2.4e9,
    "density_per_m2": 0.1,
    "rate_su": 1.0,
    "circuit_power_db": 100.0,
    "r_b_star_m": 327.3,
    "pc_chain_db": (100.0, 110.0, 120.0),
    "pc_chain_r_m": (327.3, 582.0, 1035.0),
    "density_chain_per_m2": (0.1, 1.0, 5.0),
    "density_chain_r_m": (327.3, 184.05, 123.08),
}

CONVENTION_NOTES = (
    "excess losses are read as dB and converted to linear power ratios",
    "the free-space constant (4*pi*f_c/c)^2 is included in the kernel",
    "all powers are linear ratios normalized by noise power",
)


def calibration_report(cfg: BisectionConfig = DEFAULT_BISECTION,
                       quad: QuadratureConfig = DEFAULT_QUADRATURE) -> dict:
    """Compare the planner against the published reference operating point.

    The ratio chains are scale-free and must hold under any unit convention;
    the absolute radius depends on conventions the reference leaves
    unstated, so it is reported with a discrepancy factor rather than
    enforced. Status is CONFIRMED only if the absolute radius agrees to 1%.
    """
    ref = CALIBRATION_REFERENCE
    env = preset(ref["environment"], carrier_hz=ref["carrier_hz"])
    sol = cached_normalized_altitude(env, cfg, quad)

    def radius(pc_db: float, density: float) -> float:
        sub = Subregion(label="calibration", area_m2=math.pi, density=density, env=env)
        params = ServiceParams(rate_su=ref["rate_su"],
                               circuit_power=10.0 ** (pc_db / 10.0), battery_j=1.0)
        return optimal_radius(sub, params, sol)

    r100 = radius(100.0, 0.1)
    r110 = radius(110.0, 0.1)
    r120 = radius(120.0, 0.1)
    r_d1 = radius(100.0, 1.0)
    r_d5 = radius(100.0, 5.0)

    factor = r100 / ref["r_b_star_m"]
    status = "CONFIRMED" if abs(factor - 1.0) <= 0.01 else "DISCREPANT"
    return {
        "reference": {
            "environment": ref["environment"],
            "carrier_hz": ref["carrier_hz"],
            "density_per_m2": ref["density_per_m2"],
            "rate_su": ref["rate_su"],
            "circuit_power_db": ref["circuit_power_db"],
            "r_b_star_m": ref["r_b_star_m"],
        },
        "computed_r_b_star_m": r100,
        "discrepancy_factor": factor,
        "status": status,
        "pc_ratio_chain": {
            "computed_110_over_100": r110 / r100,
            "computed_120_over_110": r120 / r110,
            "expected": 10.0 ** 0.25,
            "reference_110_over_100": ref["pc_chain_r_m"][1] / ref["pc_chain_r_m"][0],
            "reference_120_over_110": ref["pc_chain_r_m"][2] / ref["pc_chain_r_m"][1],
        },
        "density_ratio_chain": {
            "computed_1_over_01": r_d1 / r100,
            "computed_5_over_01": r_d5 / r100,
            "expected_1_over_01": 10.0 ** -0.25,
            "expected_5_over_01": 50.0 ** -0.25,
            "reference_1_over_01": ref["density_chain_r_m"][1] / ref["density_chain_r_m"][0],
            "reference_5_over_01": ref["density_chain_r_m"][2] / ref["density_chain_r_m"][0],
        },
        "convention": list(CONVENTION_NOTES),
    }
