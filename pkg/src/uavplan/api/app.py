"""FastAPI service exposing the planner.

Error mapping: scenario/input problems are 400; solver failures and
infeasible requests are 422 with a machine-readable code in the detail;
request bodies that fail schema validation get FastAPI's native 422.
"""
from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..altitude import BracketFailure, NoSolution
from ..placement import DegenerateDensity
from ..scenario import ScenarioError
from . import handlers
from .schemas import (
    ContourRequest,
    ContourResponse,
    EnvironmentsResponse,
    KernelRequest,
    KernelResponse,
    LayoutRequest,
    LayoutResponse,
    PlanRequest,
    PlanResponse,
    SimulateRequest,
    SimulateResponse,
    SweepRequest,
    SweepResponse,
)

app = FastAPI(
    title="uavplan",
    description="Energy-optimal 3D placement of UAV-mounted base stations",
    version="0.1.0",
)


@app.exception_handler(ScenarioError)
async def _scenario_error(request: Request, exc: ScenarioError):
    return JSONResponse(status_code=400,
                        content={"detail": {"code": "input", "message": str(exc)}})


@app.exception_handler(BracketFailure)
@app.exception_handler(DegenerateDensity)
async def _solver_error(request: Request, exc: Exception):
    return JSONResponse(status_code=422,
                        content={"detail": {"code": "solver", "message": str(exc)}})


@app.exception_handler(NoSolution)
async def _infeasible(request: Request, exc: NoSolution):
    return JSONResponse(status_code=422,
                        content={"detail": {"code": "infeasible", "message": str(exc)}})


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/environments", response_model=EnvironmentsResponse)
def environments():
    return handlers.environments()


@app.post("/plan", response_model=PlanResponse)
def plan(req: PlanRequest):
    return handlers.plan(req)


@app.post("/kernel", response_model=KernelResponse)
def kernel(req: KernelRequest):
    return handlers.kernel(req)


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest):
    return handlers.sweep(req)


@app.post("/contour", response_model=ContourResponse)
def contour(req: ContourRequest):
    return handlers.contour(req)


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest):
    return handlers.simulate(req)


@app.post("/layout", response_model=LayoutResponse)
def layout(req: LayoutRequest):
    return handlers.layout(req)
