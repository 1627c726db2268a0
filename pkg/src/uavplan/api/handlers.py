"""Shared command handlers: the HTTP endpoints and the CLI both call these.

Handlers take a request model and return a response model; failures are
signalled with the planner's typed exceptions (ScenarioError for input
problems, BracketFailure/DegenerateDensity for solver failures, NoSolution
for infeasible requests) and mapped to transport-specific codes by the
callers. Every numeric output is rounded to 12 significant digits here so
the service and the CLI emit identical values.
"""
from __future__ import annotations

import math
from dataclasses import replace

from .. import montecarlo, placement
from ..altitude import DEFAULT_BISECTION, cached_normalized_altitude, iso_power_altitude_curve
from ..channel import preset, preset_names
from ..layout import hex_disk_centers
from ..power import ServiceParams, kernel_gamma, kernel_gamma_derivative, total_transmit_power
from ..scenario import (
    Scenario,
    ScenarioError,
    build_bisection,
    build_quadrature,
    build_service,
    build_sim,
    build_subregions,
    quadrature_with_override,
    subregion_rect,
)
from .schemas import (
    CalibrationModel,
    ContourRequest,
    ContourResponse,
    ContourRow,
    EnvironmentModel,
    EnvironmentsResponse,
    KernelRequest,
    KernelResponse,
    KernelRow,
    LayoutCount,
    LayoutRequest,
    LayoutResponse,
    LayoutRow,
    PlanRequest,
    PlanResponse,
    SimulateRequest,
    SimulateResponse,
    SubregionPlanModel,
    SubregionSimModel,
    SweepLocusRow,
    SweepRequest,
    SweepResponse,
    SweepRow,
)


def _r(x):
    """Cap a float at 12 significant digits; None passes through."""
    if x is None:
        return None
    return float(f"{x:.12g}")


def _round_nested(obj):
    if isinstance(obj, float):
        return _r(obj)
    if isinstance(obj, dict):
        return {k: _round_nested(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_nested(v) for v in obj]
    return obj


def plan(req: PlanRequest) -> PlanResponse:
    scn = req.scenario
    subs = build_subregions(scn)
    params = build_service(scn)
    quad = build_quadrature(scn)
    cfg = build_bisection(scn)

    result = placement.plan_area(subs, params, cfg, quad)
    models = []
    for rec in result.subregions:
        models.append(SubregionPlanModel(
            label=rec.label,
            environment=rec.env_name,
            r_b_star_m=_r(rec.r_b_star),
            h_star_m=_r(rec.h_star),
            h_n_star=_r(rec.h_n_star),
            n_uav=_r(rec.n_uav),
            n_uav_ceil=None if rec.n_uav is None else math.ceil(rec.n_uav),
            p_t=_r(rec.p_t),
            p_s=_r(rec.p_s),
            t_h_s=_r(rec.t_h),
            phi_per_s=_r(rec.phi),
            phi_lower_bound_per_s=_r(rec.phi_lower_bound),
            circuit_balance_residual=_r(rec.circuit_balance_residual),
            degenerate=rec.degenerate,
        ))
    cal = placement.calibration_report(cfg, quad)
    return PlanResponse(
        subregions=models,
        phi_total_per_s=_r(result.phi_total),
        calibration=CalibrationModel.model_validate(_round_nested(cal)),
    )


def kernel(req: KernelRequest) -> KernelResponse:
    try:
        env = preset(req.environment, carrier_hz=req.carrier_hz)
    except KeyError as err:
        raise ScenarioError(str(err)) from err
    quad = quadrature_with_override()
    rows = []
    for h_n in req.range.points():
        rows.append(KernelRow(
            h_n=_r(h_n),
            gamma=_r(kernel_gamma(env, h_n, quad)),
            dgamma_dhn=_r(kernel_gamma_derivative(env, h_n, quad)),
        ))
    return KernelResponse(environment=env.name, rows=rows)


def _pick_subregion(scn: Scenario, label: str | None):
    subs = build_subregions(scn)
    if label is None:
        return subs[0]
    for sub in subs:
        if sub.label == label:
            return sub
    raise ScenarioError(f"subregions: no subregion labelled {label!r}")


def sweep(req: SweepRequest) -> SweepResponse:
    scn = req.scenario
    base_sub = _pick_subregion(scn, req.label)
    base_params = build_service(scn)
    quad = build_quadrature(scn)
    cfg = build_bisection(scn)
    radii = req.radii.points()
    if any(r <= 0.0 for r in radii):
        raise ScenarioError("radii: sweep radii must be positive")

    sol = cached_normalized_altitude(base_sub.env, cfg, quad)
    rows: list[SweepRow] = []
    locus: list[SweepLocusRow] = []
    for value in req.values:
        sub, params = base_sub, base_params
        if req.parameter == "pc_db":
            params = replace(base_params, circuit_power=10.0 ** (value / 10.0))
        elif req.parameter == "density":
            if value < 0.0:
                raise ScenarioError("values: density must be >= 0")
            sub = replace(base_sub, density=value)
        else:  # rate
            if value <= 0.0:
                raise ScenarioError("values: rate must be positive")
            params = replace(base_params, rate_su=value)
        for r_b in radii:
            rows.append(SweepRow(
                param_value=_r(value), r_b=_r(r_b),
                phi=_r(placement.recall_frequency(sub, r_b, params, sol))))
        r_star = placement.optimal_radius(sub, params, sol)
        locus.append(SweepLocusRow(
            param_value=_r(value), r_b_star=_r(r_star),
            phi_star=_r(placement.optimal_recall_frequency(sub, params, sol))))
    return SweepResponse(parameter=req.parameter, rows=rows, locus=locus)


def contour(req: ContourRequest) -> ContourResponse:
    try:
        env = preset(req.environment, carrier_hz=req.carrier_hz)
    except KeyError as err:
        raise ScenarioError(str(err)) from err
    quad = quadrature_with_override()
    radii = req.radii.points()
    if any(r <= 0.0 for r in radii):
        raise ScenarioError("radii: contour radii must be positive")
    params = ServiceParams(rate_su=req.rate_su, circuit_power=0.0, battery_j=1.0)
    sol = cached_normalized_altitude(env, DEFAULT_BISECTION, quad)
    band = iso_power_altitude_curve(env, req.power_db, req.density_per_m2,
                                    params, radii, sol=sol, quad=quad)
    rows = [ContourRow(r_b=_r(r), h_low=_r(lo), h_high=_r(hi),
                       h_opt=_r(r * sol.h_n_star))
            for r, lo, hi in band]
    return ContourResponse(environment=env.name, power_db=_r(req.power_db), rows=rows)


def simulate(req: SimulateRequest) -> SimulateResponse:
    scn = req.scenario
    subs = build_subregions(scn)
    params = build_service(scn)
    if params.circuit_power == 0.0:
        raise ScenarioError(
            "service.circuit_power_db: zero circuit power degenerates to zero "
            "radius and cannot be simulated")
    quad = build_quadrature(scn)
    cfg = build_bisection(scn)
    sim = build_sim(scn, trials=req.trials, seed=req.seed)

    models = []
    all_ok = True
    for sub in subs:
        sol = cached_normalized_altitude(sub.env, cfg, quad)
        r_star = placement.optimal_radius(sub, params, sol)
        h_star = r_star * sol.h_n_star
        analytic = total_transmit_power(sub.env, r_star, sub.density, h_star,
                                        params, quad)
        res = montecarlo.empirical_recall_frequency(sub, r_star, params, sol, sim)
        z = 0.0 if res.stderr_pt == 0.0 else (res.mean_pt - analytic) / res.stderr_pt
        ok = abs(z) <= 3.0
        all_ok = all_ok and ok
        models.append(SubregionSimModel(
            label=sub.label,
            r_b_star_m=_r(r_star),
            h_star_m=_r(h_star),
            analytic_p_t=_r(analytic),
            mean_p_t=_r(res.mean_pt),
            stderr_p_t=_r(res.stderr_pt),
            z_score=_r(z),
            within_3_sigma=ok,
            mean_users=_r(res.mean_users),
            expected_users=_r(sub.density * math.pi * r_star * r_star),
            empirical_phi_per_s=_r(res.empirical_phi),
            analytic_phi_per_s=_r(placement.optimal_recall_frequency(sub, params, sol)),
        ))
    return SimulateResponse(trials=sim.trials, seed=sim.seed,
                            subregions=models, all_within_3_sigma=all_ok)


def layout(req: LayoutRequest) -> LayoutResponse:
    scn = req.scenario
    subs = build_subregions(scn)
    params = build_service(scn)
    if params.circuit_power == 0.0:
        raise ScenarioError(
            "service.circuit_power_db: zero circuit power degenerates to zero "
            "radius and has no disk layout")
    quad = build_quadrature(scn)
    cfg = build_bisection(scn)

    rows: list[LayoutRow] = []
    counts: list[LayoutCount] = []
    for spec, sub in zip(scn.subregions, subs):
        rect = subregion_rect(spec)
        if rect is None:
            raise ScenarioError(
                f"subregions.{spec.label}.geometry: layout requires a geometry block")
        sol = cached_normalized_altitude(sub.env, cfg, quad)
        r_star = placement.optimal_radius(sub, params, sol)
        h_star = r_star * sol.h_n_star
        centers = hex_disk_centers(rect, r_star)
        for cx, cy in centers:
            rows.append(LayoutRow(label=sub.label, cx=_r(cx), cy=_r(cy),
                                  r_b=_r(r_star), h=_r(h_star)))
        disk_n = 0.0 if rect.area == 0.0 else placement.uav_count(rect.area, r_star)
        deviation = 0.0 if disk_n == 0.0 else len(centers) / disk_n - 1.0
        counts.append(LayoutCount(label=sub.label, lattice_count=len(centers),
                                  disk_model_count=_r(disk_n), deviation=_r(deviation)))
    return LayoutResponse(rows=rows, counts=counts)


def environments() -> EnvironmentsResponse:
    models = []
    for name in preset_names():
        env = preset(name)
        models.append(EnvironmentModel(name=env.name, a=env.a, b=env.b,
                                       eta_los_db=env.eta_los_db,
                                       eta_nlos_db=env.eta_nlos_db))
    return EnvironmentsResponse(presets=models)
