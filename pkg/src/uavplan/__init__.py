"""uavplan: energy-optimal 3D placement of UAV-mounted base stations.

Core model modules (channel, power, altitude, placement) are pure and
deterministic; montecarlo is the seeded stochastic cross-check. The api
subpackage wraps everything as a FastAPI service and the cli module is a
thin client over the same handlers.
"""

from .altitude import (
    BisectionConfig,
    BracketFailure,
    NoSolution,
    iso_power_altitude_curve,
    optimal_altitude_for_radius,
    optimal_normalized_altitude,
)
from .channel import (
    LOS,
    NLOS,
    Environment,
    LinkGeometry,
    average_path_loss,
    los_probability,
    los_probability_altitude_derivative,
    path_loss,
    preset,
    preset_names,
)
from .montecarlo import (
    SimConfig,
    SimResult,
    empirical_recall_frequency,
    grid_search_oracle,
    sample_transmit_power,
)
from .placement import (
    DegenerateDensity,
    PlacementPlan,
    Subregion,
    SubregionPlan,
    optimal_radius,
    optimal_recall_frequency,
    plan_area,
    recall_frequency,
    uav_count,
)
from .power import (
    KernelSolution,
    QuadratureConfig,
    QuadratureError,
    ServiceParams,
    kernel_gamma,
    kernel_gamma_derivative,
    per_user_power,
    scale_factor,
    total_transmit_power,
)

__version__ = "0.1.0"
