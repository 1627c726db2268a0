"""Stochastic oracle for the analytic power and recall-frequency formulas.

Users are dropped by a Poisson point process on the coverage disk and each
link is declared LOS or NLOS by a Bernoulli draw at its elevation angle, so
the sampled mean transmit power is an unbiased estimate of the disk
integral. Trial i draws from a generator seeded by (seed, i): results are
reproducible bit-for-bit and independent of execution order, and the first
trial of a long run equals a run with trials=1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channel import Environment, LinkGeometry, batch_los_probability
from .placement import Subregion, recall_frequency, uav_count
from .power import (
    DEFAULT_QUADRATURE,
    KernelSolution,
    QuadratureConfig,
    ServiceParams,
    kernel_gamma,
)


@dataclass(frozen=True)
class SimConfig:
    """Trial count, reproducibility seed, and progress cadence."""

    trials: int
    seed: int = 0
    batch: int = 1_000_000  # sampled users per progress callback

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")


@dataclass(frozen=True)
class SimResult:
    """Empirical transmit power (and optionally recall frequency) with errors."""

    mean_pt: float
    stderr_pt: float
    mean_users: float
    empirical_phi: float | None
    trials: int
    seed: int
    stderr_phi: float | None = None


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng((seed, index))


def sample_transmit_power(env: Environment, r_b: float, density: float, h: float,
                          params: ServiceParams, sim: SimConfig,
                          progress: Callable[[int, int], None] | None = None,
                          ) -> SimResult:
    """Estimate the expected transmit power of one UAV by PPP trials.

    Per trial: K ~ Poisson(density * pi * r_b^2) users at radii r_b*sqrt(U)
    (uniform on the disk; the angle never enters the power and is not
    drawn), each assigned LOS with the elevation-angle probability, then
    the per-user powers are summed. Draw order within a trial is radii
    first, then the LOS uniforms.
    """
    if r_b <= 0.0:
        raise ValueError("r_b must be positive")
    if h < 0.0:
        raise ValueError("h must be >= 0")
    if density < 0.0:
        raise ValueError("density must be >= 0")

    mean_count = density * math.pi * r_b * r_b
    factor = params.rate_factor
    fspl = env.fspl_constant
    eta_los = env.eta_los
    eta_nlos = env.eta_nlos

    totals = np.zeros(sim.trials)
    counts = np.zeros(sim.trials)
    users_since_report = 0
    for i in range(sim.trials):
        rng = _trial_rng(sim.seed, i)
        k = int(rng.poisson(mean_count))
        counts[i] = k
        if k == 0:
            continue
        radii = r_b * np.sqrt(rng.random(k))
        los_draw = rng.random(k)
        p0 = batch_los_probability(env, radii, h)
        eta = np.where(los_draw < p0, eta_los, eta_nlos)
        powers = fspl * (radii * radii + h * h) * eta * factor
        totals[i] = float(np.sum(powers))
        if progress is not None:
            users_since_report += k
            if users_since_report >= sim.batch:
                progress(i + 1, int(np.sum(counts[:i + 1])))
                users_since_report = 0

    mean_pt = float(np.mean(totals))
    stderr_pt = float(np.std(totals, ddof=1) / math.sqrt(sim.trials)) if sim.trials > 1 else 0.0
    return SimResult(mean_pt=mean_pt, stderr_pt=stderr_pt,
                     mean_users=float(np.mean(counts)),
                     empirical_phi=None, trials=sim.trials, seed=sim.seed)


def sample_los_fraction(env: Environment, geom: LinkGeometry, draws: int,
                        seed: int = 0) -> float:
    """Empirical LOS fraction of repeated Bernoulli draws at one geometry."""
    if draws < 1:
        raise ValueError("draws must be >= 1")
    p0 = batch_los_probability(env, geom.r_u, geom.h)
    rng = _trial_rng(seed, 0)
    return float(np.mean(rng.random(draws) < p0))


def empirical_recall_frequency(sub: Subregion, r_b: float, params: ServiceParams,
                               sol: KernelSolution, sim: SimConfig) -> SimResult:
    """Estimate the recall frequency from sampled transmit power.

    Samples at the optimal altitude for the given radius, then combines the
    disk count with total consumed power and battery capacity; the standard
    error propagates linearly through that affine map.
    """
    h = r_b * sol.h_n_star
    base = sample_transmit_power(sub.env, r_b, sub.density, h, params, sim)
    n = uav_count(sub.area_m2, r_b)
    phi = n * (base.mean_pt + params.circuit_power) / params.battery_j
    stderr_phi = n * base.stderr_pt / params.battery_j
    return SimResult(mean_pt=base.mean_pt, stderr_pt=base.stderr_pt,
                     mean_users=base.mean_users, empirical_phi=phi,
                     trials=base.trials, seed=base.seed, stderr_phi=stderr_phi)


def grid_search_oracle(objective, grid: Sequence[float],
                       env: Environment | None = None,
                       sub: Subregion | None = None,
                       params: ServiceParams | None = None,
                       sol: KernelSolution | None = None,
                       quad: QuadratureConfig = DEFAULT_QUADRATURE,
                       ) -> tuple[float, float]:
    """Exhaustively minimize an objective over a grid; returns (argmin, min).

    objective is "gamma" (kernel vs normalized altitude, needs env),
    "phi" (recall frequency vs radius, needs sub/params/sol), or any
    callable for ad-hoc checks.
    """
    pts = np.asarray(grid, dtype=float)
    if pts.size < 2:
        raise ValueError("grid must contain at least 2 points")
    if np.any(pts < 0.0):
        raise ValueError("grid bounds must be nonnegative")

    if objective == "gamma":
        if env is None:
            raise ValueError("gamma objective requires env")
        fn = lambda x: kernel_gamma(env, x, quad)
    elif objective == "phi":
        if sub is None or params is None or sol is None:
            raise ValueError("phi objective requires sub, params and sol")
        fn = lambda x: recall_frequency(sub, x, params, sol)
    elif callable(objective):
        fn = objective
    else:
        raise ValueError(f"unknown objective {objective!r}")

    values = np.array([fn(float(x)) for x in pts])
    idx = int(np.argmin(values))
    return float(pts[idx]), float(values[idx])
