"""Expected transmit power over a coverage disk and its radius-normalized kernel.

The total transmit power of one UAV factors into a scale part
``density * r_b**4 * (2**rate - 1)`` and a kernel part that depends only on
the environment and the altitude-to-radius ratio. Both sides of that
identity are computed here by independent code paths: the total by direct
quadrature over [0, r_b], the kernel by quadrature over the unit disk.

All powers are linear ratios normalized by noise power, so the noise term
drops out of every formula.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import (
    Environment,
    LinkGeometry,
    average_path_loss,
    batch_average_excess,
    batch_average_path_loss,
    batch_los_probability_altitude_derivative,
)

# Panel-doubling stops here; a smooth integrand that has not converged by
# then indicates broken inputs rather than a resolution problem.
MAX_PANELS = 1024


class QuadratureError(RuntimeError):
    """Composite quadrature failed to converge within the panel cap."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite Gauss-Legendre settings for the disk integrals."""

    panels: int = 16
    nodes_per_panel: int = 8
    rel_tol: float = 1e-9

    def __post_init__(self):
        if self.panels < 1:
            raise ValueError("panels must be >= 1")
        if self.nodes_per_panel < 2:
            raise ValueError("nodes_per_panel must be >= 2")
        if self.rel_tol <= 0.0:
            raise ValueError("rel_tol must be positive")


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class ServiceParams:
    """Per-user service contract and UAV energy budget."""

    rate_su: float  # spectral rate per user, bit/s/Hz
    circuit_power: float  # on-board circuit power, linear ratio to noise power
    battery_j: float  # battery capacity, J
    noise_normalized: bool = True

    def __post_init__(self):
        if self.rate_su <= 0.0:
            raise ValueError("rate_su must be positive")
        if self.circuit_power < 0.0:
            raise ValueError("circuit_power must be >= 0")
        if self.battery_j <= 0.0:
            raise ValueError("battery_j must be positive")
        if not self.noise_normalized:
            raise ValueError("powers must be expressed as ratios to noise power")

    @property
    def rate_factor(self) -> float:
        """SNR required for the per-user rate: 2**rate - 1."""
        return 2.0 ** self.rate_su - 1.0


@dataclass(frozen=True)
class KernelSolution:
    """Optimal normalized altitude and kernel value for one environment."""

    h_n_star: float  # optimal altitude-to-radius ratio, dimensionless
    gamma_at_opt: float  # kernel value at the optimum, normalized power
    env_name: str

    def __post_init__(self):
        if self.h_n_star < 0.0:
            raise ValueError("h_n_star must be >= 0")
        if self.gamma_at_opt <= 0.0:
            raise ValueError("gamma_at_opt must be positive")


@lru_cache(maxsize=64)
def _gauss_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _composite_estimate(f, upper: float, panels: int, nodes: int) -> float:
    x, w = _gauss_nodes(nodes)
    edges = np.linspace(0.0, upper, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    pts = (mid[:, None] + half * x[None, :]).ravel()
    wts = half * np.broadcast_to(w, (panels, nodes)).ravel()
    return float(np.sum(f(pts) * wts))


def integrate_radial(f, upper: float, quad: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Integrate f over [0, upper] with panel doubling until rel_tol is met.

    The Gauss-Legendre nodes are open, so f is never evaluated at 0; the
    disk integrands carry an r factor that makes the origin harmless anyway.
    """
    panels = quad.panels
    value = _composite_estimate(f, upper, panels, quad.nodes_per_panel)
    while True:
        panels *= 2
        if panels > MAX_PANELS:
            raise QuadratureError(
                f"no convergence to rel_tol={quad.rel_tol:g} within {MAX_PANELS} panels")
        refined = _composite_estimate(f, upper, panels, quad.nodes_per_panel)
        if abs(refined - value) <= quad.rel_tol * max(abs(refined), 1e-300):
            return refined
        value = refined


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def per_user_power(env: Environment, geom: LinkGeometry, params: ServiceParams) -> float:
    """Average transmit power allocated to one user, normalized by noise."""
    return average_path_loss(env, geom) * params.rate_factor


def total_transmit_power(env: Environment, r_b: float, density: float, h: float,
                         params: ServiceParams,
                         quad: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Expected transmit power of one UAV over its coverage disk.

    Direct quadrature of density * integral(2*pi*r * per-user power) over
    [0, r_b]; deliberately not routed through the kernel decomposition so
    the two stay independent checks of each other.
    """
    if r_b <= 0.0:
        raise ValueError("r_b must be positive")
    if density < 0.0:
        raise ValueError("density must be >= 0")
    if h < 0.0:
        raise ValueError("h must be >= 0")
    if density == 0.0:
        return 0.0

    def integrand(r):
        return 2.0 * np.pi * r * batch_average_path_loss(env, r, h)

    # density and the rate factor stay outside the quadrature so the result
    # is exactly linear in both.
    return density * params.rate_factor * integrate_radial(integrand, r_b, quad)


def kernel_gamma(env: Environment, h_n: float,
                 quad: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Transmit-power kernel: the unit-radius, unit-density, unit-SNR integral."""
    if h_n < 0.0:
        raise ValueError("h_n must be >= 0")

    def integrand(r):
        return 2.0 * np.pi * r * batch_average_path_loss(env, r, h_n)

    return integrate_radial(integrand, 1.0, quad)


def kernel_gamma_derivative(env: Environment, h_n: float,
                            quad: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Analytic derivative of the kernel with respect to normalized altitude.

    Differentiates the kernel integrand in h: the free-space part contributes
    2*h*(average excess) and the LOS-mixing part contributes
    (r^2 + h^2) * dP0/dh * (eta_los - eta_nlos), both weighted like the
    kernel itself.
    """
    if h_n < 0.0:
        raise ValueError("h_n must be >= 0")
    delta_eta = env.eta_los - env.eta_nlos
    fspl = env.fspl_constant

    def integrand(r):
        excess = batch_average_excess(env, r, h_n)
        dp0 = batch_los_probability_altitude_derivative(env, r, h_n)
        core = 2.0 * h_n * excess + (r * r + h_n * h_n) * dp0 * delta_eta
        return 2.0 * np.pi * r * fspl * core

    return integrate_radial(integrand, 1.0, quad)


def scale_factor(r_b: float, density: float, params: ServiceParams) -> float:
    """Coverage-parameter multiplier: density * r_b**4 * (2**rate - 1)."""
    if r_b <= 0.0:
        raise ValueError("r_b must be positive")
    if density < 0.0:
        raise ValueError("density must be >= 0")
    return density * r_b ** 4 * params.rate_factor
