"""Command-line client for the planner.

Every subcommand builds the same request models the HTTP service accepts
and runs them through the shared handlers, either in-process (default) or
against a remote service via --server. Exit codes: 0 ok, 2 input error,
3 solver error, 4 infeasible, 5 validation failure.
"""
from __future__ import annotations

import json
import math
import sys

import click
import httpx

from .altitude import BracketFailure, NoSolution
from .placement import DegenerateDensity
from .power import QuadratureError
from .scenario import ScenarioError, load_scenario
from .api import handlers
from .api.schemas import (
    ContourRequest,
    ContourResponse,
    KernelRequest,
    KernelResponse,
    LayoutRequest,
    LayoutResponse,
    PlanRequest,
    PlanResponse,
    RangeSpec,
    SimulateRequest,
    SimulateResponse,
    SweepRequest,
    SweepResponse,
)

EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_INFEASIBLE = 4
EXIT_VALIDATION = 5


def _die(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_range(text: str) -> RangeSpec:
    parts = text.split(":")
    if len(parts) != 3:
        _die(EXIT_INPUT, f"range must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        _die(EXIT_INPUT, f"range must be numeric start:stop:step, got {text!r}")
    try:
        return RangeSpec(start=start, stop=stop, step=step)
    except ValueError as err:
        _die(EXIT_INPUT, f"bad range {text!r}: {err}")


def _parse_values(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        _die(EXIT_INPUT, f"values must be comma-separated numbers, got {text!r}")


def _load(path: str):
    try:
        return load_scenario(path)
    except ScenarioError as err:
        _die(EXIT_INPUT, str(err))


def _build(model_cls, **kwargs):
    """Construct a request model, turning validation failures into exit 2."""
    try:
        return model_cls(**kwargs)
    except ValueError as err:
        _die(EXIT_INPUT, str(err))


def _call(server: str | None, path: str, request, response_cls, handler):
    """Run a request locally or POST it to a remote service."""
    if not server:
        try:
            return handler(request)
        except ScenarioError as err:
            _die(EXIT_INPUT, str(err))
        except (BracketFailure, DegenerateDensity, QuadratureError) as err:
            _die(EXIT_SOLVER, str(err))
        except NoSolution as err:
            _die(EXIT_INFEASIBLE, str(err))
    url = server.rstrip("/") + path
    try:
        resp = httpx.post(url, json=request.model_dump(mode="json"), timeout=600.0)
    except httpx.HTTPError as err:
        _die(EXIT_INPUT, f"cannot reach server: {err}")
    if resp.status_code == 200:
        return response_cls.model_validate(resp.json())
    detail = resp.json().get("detail")
    code = detail.get("code") if isinstance(detail, dict) else None
    message = detail.get("message") if isinstance(detail, dict) else str(detail)
    if code == "solver":
        _die(EXIT_SOLVER, message)
    if code == "infeasible":
        _die(EXIT_INFEASIBLE, message)
    _die(EXIT_INPUT, message)


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and x.is_integer() and abs(x) < 1e15:
        return repr(x)
    return repr(x) if isinstance(x, float) else str(x)


def _json_text(model) -> str:
    return json.dumps(model.model_dump(mode="json"), indent=2) + "\n"


def _csv_text(header: list[str], rows: list[list], comments: list[str] | None = None) -> str:
    lines = [f"# {c}" for c in (comments or [])]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_num(v) for v in row))
    return "\n".join(lines) + "\n"


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Run against a remote uavplan service instead of in-process.")
@click.pass_context
def main(ctx, server):
    """Plan energy-optimal 3D placements of UAV base stations."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.argument("scenario_path", metavar="SCENARIO")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json")
@click.option("--output", default=None, metavar="PATH")
@click.pass_context
def plan(ctx, scenario_path, fmt, output):
    """Compute the optimal placement plan for a scenario file."""
    scn = _load(scenario_path)
    req = _build(PlanRequest, scenario=scn)
    resp = _call(ctx.obj["server"], "/plan", req, PlanResponse, handlers.plan)
    if fmt == "json":
        _emit(_json_text(resp), output)
    else:
        _emit(_plan_table(resp), output)


def _plan_table(resp: PlanResponse) -> str:
    header = ["label", "environment", "r_b*[m]", "h*[m]", "N", "ceil(N)",
              "P_t[dB]", "P_s[dB]", "T_h[s]", "phi[1/s]"]
    rows = []
    for s in resp.subregions:
        rows.append([
            s.label, s.environment,
            f"{s.r_b_star_m:.4g}", f"{s.h_star_m:.4g}",
            "-" if s.n_uav is None else f"{s.n_uav:.4g}",
            "-" if s.n_uav_ceil is None else str(s.n_uav_ceil),
            "-" if s.p_t <= 0.0 else f"{10 * math.log10(s.p_t):.4g}",
            "-" if s.p_s <= 0.0 else f"{10 * math.log10(s.p_s):.4g}",
            "-" if s.t_h_s is None else f"{s.t_h_s:.4g}",
            f"{s.phi_per_s:.6g}",
        ])
    widths = [max(len(header[i]), max((len(r[i]) for r in rows), default=0))
              for i in range(len(header))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    for r in rows:
        lines.append("  ".join(v.ljust(widths[i]) for i, v in enumerate(r)))
    lines.append(f"phi_total = {resp.phi_total_per_s!r} 1/s")
    cal = resp.calibration
    lines.append(
        f"calibration: {cal.status} (computed r_b* {cal.computed_r_b_star_m!r} m "
        f"vs reference {cal.reference['r_b_star_m']!r} m, "
        f"factor {cal.discrepancy_factor!r})")
    return "\n".join(lines) + "\n"


@main.command()
@click.option("--env", "environment", default="urban", metavar="NAME")
@click.option("--carrier-hz", default=2.4e9, show_default=True)
@click.option("--range", "range_text", required=True, metavar="A:B:STEP",
              help="Normalized-altitude grid, e.g. 0:2:0.01.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--output", default=None, metavar="PATH")
@click.pass_context
def kernel(ctx, environment, carrier_hz, range_text, fmt, output):
    """Tabulate the transmit-power kernel and its derivative."""
    req = _build(KernelRequest, environment=environment, carrier_hz=carrier_hz,
                 range=_parse_range(range_text))
    resp = _call(ctx.obj["server"], "/kernel", req, KernelResponse, handlers.kernel)
    if fmt == "json":
        _emit(_json_text(resp), output)
    else:
        rows = [[r.h_n, r.gamma, r.dgamma_dhn] for r in resp.rows]
        _emit(_csv_text(["h_n", "gamma", "dgamma_dhn"], rows), output)


@main.command()
@click.argument("scenario_path", metavar="SCENARIO")
@click.option("--parameter", type=click.Choice(["pc_db", "density", "rate"]), required=True)
@click.option("--values", "values_text", required=True, metavar="V1,V2,...")
@click.option("--radii", "radii_text", required=True, metavar="A:B:STEP")
@click.option("--label", default=None, help="Subregion to sweep (default: first).")
@click.option("--output", default=None, metavar="PATH")
@click.option("--locus-output", default=None, metavar="PATH",
              help="Where to write the optimal-locus CSV "
                   "(default: <output>.locus.csv, or stdout after the sweep).")
@click.pass_context
def sweep(ctx, scenario_path, parameter, values_text, radii_text, label,
          output, locus_output):
    """Sweep the recall frequency over radius for several parameter values."""
    scn = _load(scenario_path)
    req = _build(SweepRequest, scenario=scn, parameter=parameter,
                 values=_parse_values(values_text),
                 radii=_parse_range(radii_text), label=label)
    resp = _call(ctx.obj["server"], "/sweep", req, SweepResponse, handlers.sweep)
    main_csv = _csv_text(["param_value", "r_b", "phi"],
                         [[r.param_value, r.r_b, r.phi] for r in resp.rows])
    locus_csv = _csv_text(["param_value", "r_b_star", "phi_star"],
                          [[r.param_value, r.r_b_star, r.phi_star] for r in resp.locus])
    if locus_output is None and output is not None:
        locus_output = output + ".locus.csv"
    _emit(main_csv, output)
    if locus_output:
        _emit(locus_csv, locus_output)
    else:
        sys.stdout.write("\n" + locus_csv)


@main.command()
@click.option("--env", "environment", default="urban", metavar="NAME")
@click.option("--carrier-hz", default=2.4e9, show_default=True)
@click.option("--power-db", type=float, required=True,
              help="Fixed transmit power, dB over noise.")
@click.option("--density", default=0.1, show_default=True, help="Users per m^2.")
@click.option("--rate", default=1.0, show_default=True, help="Per-user rate, bit/s/Hz.")
@click.option("--radii", "radii_text", required=True, metavar="A:B:STEP")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--output", default=None, metavar="PATH")
@click.pass_context
def contour(ctx, environment, carrier_hz, power_db, density, rate, radii_text,
            fmt, output):
    """Altitude band sustaining a fixed transmit power versus radius."""
    req = _build(ContourRequest, environment=environment, carrier_hz=carrier_hz,
                 power_db=power_db, density_per_m2=density,
                 rate_su=rate, radii=_parse_range(radii_text))
    resp = _call(ctx.obj["server"], "/contour", req, ContourResponse, handlers.contour)
    if fmt == "json":
        _emit(_json_text(resp), output)
    else:
        rows = [[r.r_b, r.h_low, r.h_high, r.h_opt] for r in resp.rows]
        _emit(_csv_text(["r_b", "h_low", "h_high", "h_opt"], rows), output)


@main.command()
@click.argument("scenario_path", metavar="SCENARIO")
@click.option("--trials", type=int, default=None, help="Override solver.trials.")
@click.option("--seed", type=int, default=None, help="Override solver.seed.")
@click.option("--output", default=None, metavar="PATH")
@click.pass_context
def simulate(ctx, scenario_path, trials, seed, output):
    """Validate the analytic powers against a Poisson-point-process sampler."""
    if trials is not None and trials < 1:
        _die(EXIT_INPUT, "trials must be >= 1")
    scn = _load(scenario_path)
    req = _build(SimulateRequest, scenario=scn, trials=trials, seed=seed)
    resp = _call(ctx.obj["server"], "/simulate", req, SimulateResponse,
                 handlers.simulate)
    _emit(_json_text(resp), output)
    if not resp.all_within_3_sigma:
        _die(EXIT_VALIDATION, "empirical transmit power outside 3 sigma of the quadrature")


@main.command()
@click.argument("scenario_path", metavar="SCENARIO")
@click.option("--output", default=None, metavar="PATH")
@click.pass_context
def layout(ctx, scenario_path, output):
    """Hexagonal UAV disk centers for subregions with geometry blocks."""
    scn = _load(scenario_path)
    req = _build(LayoutRequest, scenario=scn)
    resp = _call(ctx.obj["server"], "/layout", req, LayoutResponse, handlers.layout)
    comments = [
        (f"{c.label}: lattice count {c.lattice_count} vs disk-model "
         f"{c.disk_model_count!r} ({100 * c.deviation:+.1f}%); hex cells cover "
         f"2*sqrt(3)*r^2, disks pi*r^2")
        for c in resp.counts
    ]
    rows = [[r.label, r.cx, r.cy, r.r_b, r.h] for r in resp.rows]
    _emit(_csv_text(["label", "cx", "cy", "r_b", "h"], rows, comments), output)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .api.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
