"""Optimal hovering altitude via bracketed bisection on the kernel derivative.

The optimal altitude-to-radius ratio depends only on the environment, so it
is solved once per environment on the unit disk and mapped to any coverage
radius by a multiplication.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .channel import Environment
from .power import (
    DEFAULT_QUADRATURE,
    KernelSolution,
    QuadratureConfig,
    ServiceParams,
    kernel_gamma,
    kernel_gamma_derivative,
    scale_factor,
)


class BracketFailure(RuntimeError):
    """The kernel derivative never turned positive within the expansion cap."""


class NoSolution(RuntimeError):
    """No altitude meets the requested power at any of the requested radii."""


@dataclass(frozen=True)
class BisectionConfig:
    """Stopping rules for the altitude bisection.

    epsilon applies to the derivative normalized by the kernel value, which
    makes the published 1e-3 threshold unit-free; width_tol is a relative
    interval-width backstop.
    """

    epsilon: float = 1e-3
    max_expansions: int = 20
    width_tol: float = 1e-9

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_expansions < 1:
            raise ValueError("max_expansions must be >= 1")
        if self.width_tol <= 0.0:
            raise ValueError("width_tol must be positive")


DEFAULT_BISECTION = BisectionConfig()


def optimal_normalized_altitude(env: Environment,
                                cfg: BisectionConfig = DEFAULT_BISECTION,
                                quad: QuadratureConfig = DEFAULT_QUADRATURE,
                                validate: bool = False) -> KernelSolution:
    """Find the normalized altitude minimizing the transmit-power kernel.

    Expands the upper bracket bound by factors of 10 until the derivative
    changes sign, then bisects. A nonnegative derivative at zero altitude
    means climbing never pays and the boundary optimum 0 is returned.

    With validate=True the result is checked against a dense grid sweep of
    the kernel (step 1e-3 * h_max) and a mismatch raises RuntimeError.
    """
    d0 = kernel_gamma_derivative(env, 0.0, quad)
    if d0 >= 0.0:
        sol = KernelSolution(h_n_star=0.0, gamma_at_opt=kernel_gamma(env, 0.0, quad),
                             env_name=env.name)
        return sol

    h_max = 1.0
    expansions = 0
    while kernel_gamma_derivative(env, h_max, quad) < 0.0:
        expansions += 1
        if expansions > cfg.max_expansions:
            raise BracketFailure(
                f"derivative still negative at h_n={h_max:g} for {env.name!r}; "
                f"check environment parameters")
        h_max *= 10.0
    bracket_top = h_max

    h_min = 0.0
    while True:
        mid = 0.5 * (h_min + h_max)
        d = kernel_gamma_derivative(env, mid, quad)
        gamma = kernel_gamma(env, mid, quad)
        if d == 0.0 or abs(d) / gamma < cfg.epsilon or (h_max - h_min) <= cfg.width_tol * mid:
            sol = KernelSolution(h_n_star=mid, gamma_at_opt=gamma, env_name=env.name)
            break
        if d >= 0.0:
            h_max = mid
        else:
            h_min = mid

    if validate:
        _validate_against_grid(env, sol, bracket_top, quad)
    return sol


def _validate_against_grid(env: Environment, sol: KernelSolution, h_max: float,
                           quad: QuadratureConfig) -> None:
    step = 1e-3 * h_max
    grid = np.arange(0.0, h_max + 0.5 * step, step)
    values = [kernel_gamma(env, float(h), quad) for h in grid]
    best = float(grid[int(np.argmin(values))])
    if abs(best - sol.h_n_star) > step:
        raise RuntimeError(
            f"bisection optimum {sol.h_n_star:.6g} disagrees with grid sweep "
            f"minimum {best:.6g} for {env.name!r}")


@lru_cache(maxsize=256)
def cached_normalized_altitude(env: Environment,
                               cfg: BisectionConfig = DEFAULT_BISECTION,
                               quad: QuadratureConfig = DEFAULT_QUADRATURE) -> KernelSolution:
    """Memoized per-environment solve; safe under concurrent lookup."""
    return optimal_normalized_altitude(env, cfg, quad)


def optimal_altitude_for_radius(sol: KernelSolution, r_b: float) -> float:
    """Optimal hovering altitude in meters for a given coverage radius."""
    if r_b < 0.0:
        raise ValueError("r_b must be >= 0")
    return r_b * sol.h_n_star


def _kernel_root(env: Environment, target: float, lo: float, hi: float,
                 increasing: bool, quad: QuadratureConfig) -> float:
    """Bisect kernel(h) == target on one monotone branch of the kernel."""
    for _ in range(200):
        if hi - lo <= 1e-13 * max(hi, 1.0):
            break
        mid = 0.5 * (lo + hi)
        above = kernel_gamma(env, mid, quad) > target
        if above == increasing:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def iso_power_altitude_curve(env: Environment, power_db: float, density: float,
                             params: ServiceParams, radii: Sequence[float],
                             sol: KernelSolution | None = None,
                             quad: QuadratureConfig = DEFAULT_QUADRATURE,
                             ) -> list[tuple[float, float, float]]:
    """Altitude band sustaining a fixed transmit power at each radius.

    For every feasible radius returns (r_b, h_low, h_high), the altitudes at
    which the total transmit power equals the fixed level; both collapse to
    the optimal altitude at the tangency radius. When even ground level
    needs less than the fixed power, the band is clamped at h_low = 0.
    Radii beyond the maximum feasible coverage are skipped; if none are
    feasible, NoSolution is raised.
    """
    if density <= 0.0:
        raise ValueError("density must be positive for an iso-power curve")
    if sol is None:
        sol = cached_normalized_altitude(env, DEFAULT_BISECTION, quad)
    p_fix = 10.0 ** (power_db / 10.0)

    out: list[tuple[float, float, float]] = []
    for r_b in radii:
        if r_b <= 0.0:
            raise ValueError("radii must be positive")
        psi = scale_factor(r_b, density, params)
        target = p_fix / psi
        g_min = sol.gamma_at_opt
        if target < g_min * (1.0 - 1e-12):
            continue
        h_opt = r_b * sol.h_n_star
        if target <= g_min * (1.0 + 1e-9):
            out.append((r_b, h_opt, h_opt))
            continue
        hi = max(2.0 * sol.h_n_star, 1.0)
        while kernel_gamma(env, hi, quad) < target:
            hi *= 2.0
        hn_high = _kernel_root(env, target, sol.h_n_star, hi, True, quad)
        if kernel_gamma(env, 0.0, quad) >= target:
            hn_low = _kernel_root(env, target, 0.0, sol.h_n_star, False, quad)
        else:
            hn_low = 0.0
        out.append((r_b, r_b * hn_low, r_b * hn_high))
    if not out:
        raise NoSolution(
            f"power {power_db:g} dB is below the minimum required at every requested radius")
    return out
