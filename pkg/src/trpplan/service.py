"""HTTP JSON API for interactive deployment evaluation.

One synchronous endpoint evaluates either a bound map or a campaign for a
posted scenario + TRP set, with hard budget caps instead of job queues;
desk-scale requests complete in seconds. Requests are validated by hand so
schema violations return 400 with a field path and semantic violations
(too few TRPs, out-of-hall positions) return 422. Evaluation wall time is
reported in the X-Evaluation-Seconds header so identical requests produce
byte-identical bodies.
"""

from __future__ import annotations

import math
import time
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .bounds import bound_grid, grid_to_dict
from .campaign import (
    CampaignConfig,
    MeasurementMode,
    densification_step,
    los_histogram,
    run_campaign,
    worst_ue_locations,
)
from .channel import NoiseModel
from .estimator import SolveOptions
from .presets import PRESET_NAMES, deployment_preset
from .scenario import (
    Deployment,
    LayoutTag,
    ScenarioError,
    Trp,
    deployment_to_dict,
    preset_scenario,
    scenario_from_dict,
)

__all__ = ["create_app", "MAX_GRID_CELLS_PER_AXIS", "MAX_CAMPAIGN_DROPS"]

MAX_GRID_CELLS_PER_AXIS = 200
MAX_CAMPAIGN_DROPS = 50_000
MAX_SUGGESTIONS = 3
MAX_CDF_POINTS = 500


class _SchemaError(Exception):
    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class _SemanticError(Exception):
    pass


class _BudgetError(Exception):
    pass


def _parse_deployment(body: dict) -> Deployment:
    if "preset" in body:
        if not isinstance(body["preset"], str):
            raise _SchemaError("preset", "must be a string")
        try:
            deployment = deployment_preset(body["preset"])
        except KeyError as exc:
            raise _SemanticError(str(exc)) from None
        if "trps" not in body:
            return deployment
        scenario = deployment.scenario
    elif "scenario" in body:
        field = body["scenario"]
        if isinstance(field, str):
            try:
                scenario = preset_scenario(field)
            except ValueError:
                raise _SemanticError(f"unknown scenario family {field!r}") from None
        elif isinstance(field, dict):
            try:
                scenario = scenario_from_dict(field)
            except KeyError as exc:
                raise _SchemaError(f"scenario.{exc.args[0]}", "missing required field") from None
            except (ScenarioError, ValueError) as exc:
                raise _SemanticError(str(exc)) from None
        else:
            raise _SchemaError("scenario", "must be a family name or an object")
    else:
        raise _SchemaError("scenario", "either 'preset' or 'scenario' is required")

    trps_field = body.get("trps")
    if not isinstance(trps_field, list):
        raise _SchemaError("trps", "must be a list of TRP objects")
    trps = []
    for i, entry in enumerate(trps_field):
        if not isinstance(entry, dict):
            raise _SchemaError(f"trps[{i}]", "must be an object")
        try:
            trps.append(
                Trp(id=i, position=(float(entry["x"]), float(entry["y"]), float(entry["z"])))
            )
        except KeyError as exc:
            raise _SchemaError(f"trps[{i}].{exc.args[0]}", "missing required field") from None
        except (TypeError, ValueError):
            raise _SchemaError(f"trps[{i}]", "coordinates must be numbers") from None
    if len(trps) < 4:
        raise _SemanticError(
            f"got {len(trps)} TRPs; a TDOA fix requires the 4-TRP minimum"
        )
    try:
        return Deployment(scenario=scenario, trps=tuple(trps), layout_tag=LayoutTag.CUSTOM)
    except ScenarioError as exc:
        raise _SemanticError(str(exc)) from None


def _parse_noise(body: dict) -> NoiseModel:
    field = body.get("noise", {})
    if not isinstance(field, dict):
        raise _SchemaError("noise", "must be an object")
    try:
        return NoiseModel(
            sigma_toa=float(field.get("sigma_toa_m", 0.2)),
            nlos_bias_mean=float(field.get("nlos_bias_mean_m", 2.0)),
            clock_bias=float(field.get("clock_bias_m", 0.0)),
            seed=int(field.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise _SemanticError(f"noise: {exc}") from None


def _evaluate_bounds(body: dict, deployment: Deployment, noise: NoiseModel) -> dict:
    cell_size = body.get("cell_size_m", 1.0)
    if not isinstance(cell_size, (int, float)) or isinstance(cell_size, bool):
        raise _SchemaError("cell_size_m", "must be a number")
    if cell_size <= 0:
        raise _SemanticError("cell_size_m must be positive")
    scenario = deployment.scenario
    nx = math.ceil(scenario.x_len / cell_size)
    ny = math.ceil(scenario.y_len / cell_size)
    if nx > MAX_GRID_CELLS_PER_AXIS or ny > MAX_GRID_CELLS_PER_AXIS:
        raise _BudgetError(
            f"grid {nx}x{ny} exceeds the {MAX_GRID_CELLS_PER_AXIS} cells-per-axis budget"
        )
    grid = bound_grid(scenario, deployment, cell_size=float(cell_size), noise=noise)
    return {"mode": "bounds", "grid": grid_to_dict(grid)}


def _decimate_cdf(errors, max_points: int = MAX_CDF_POINTS) -> list[dict]:
    n = len(errors)
    if n == 0:
        return []
    if n <= max_points:
        idx = range(n)
    else:
        step = n / max_points
        idx = sorted({min(int(round(i * step)), n - 1) for i in range(1, max_points)} | {n - 1})
    return [{"error_m": float(errors[i]), "probability": (i + 1) / n} for i in idx]


def _evaluate_campaign(body: dict, deployment: Deployment, noise: NoiseModel) -> dict:
    options = body.get("campaign", {})
    if not isinstance(options, dict):
        raise _SchemaError("campaign", "must be an object")
    n_drops = options.get("n_drops", 2000)
    if not isinstance(n_drops, int) or isinstance(n_drops, bool) or n_drops < 1:
        raise _SchemaError("campaign.n_drops", "must be a positive integer")
    if n_drops > MAX_CAMPAIGN_DROPS:
        raise _BudgetError(f"n_drops {n_drops} exceeds the {MAX_CAMPAIGN_DROPS} budget")
    mode_field = options.get("measurement_mode", "all_trps")
    try:
        mode = MeasurementMode(mode_field)
    except ValueError:
        raise _SchemaError("campaign.measurement_mode", f"unknown mode {mode_field!r}") from None
    seed = body.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise _SchemaError("seed", "must be an integer")
    n_suggestions = options.get("n_suggestions", 1)
    if not isinstance(n_suggestions, int) or not (0 <= n_suggestions <= MAX_SUGGESTIONS):
        raise _SchemaError(
            "campaign.n_suggestions", f"must be an integer in 0..{MAX_SUGGESTIONS}"
        )
    solver_field = body.get("solver", {})
    if not isinstance(solver_field, dict):
        raise _SchemaError("solver", "must be an object")
    try:
        solve_options = SolveOptions(
            max_iterations=int(solver_field.get("max_iterations", 50)),
            step_tolerance_m=float(solver_field.get("step_tolerance_m", 1e-6)),
            solve_3d=bool(solver_field.get("solve_3d", False)),
        )
    except (TypeError, ValueError) as exc:
        raise _SchemaError("solver", str(exc)) from None

    config = CampaignConfig(
        deployment=deployment,
        noise=noise,
        n_drops=n_drops,
        measurement_mode=mode,
        seed=seed,
        solve_options=solve_options,
    )
    result = run_campaign(config)
    worst = worst_ue_locations(result, 0.1) if result.cdf.size else []
    suggestions: list[list[float]] = []
    if n_suggestions and result.cdf.size:
        proposed = densification_step(config, result, n_suggestions)
        suggestions = [list(t.position) for t in proposed.trps[deployment.n_trps :]]
    # No available fix leaves the percentiles undefined; JSON gets null.
    percentiles = {
        f"p{int(q * 100)}_m": (result.percentiles[q] if math.isfinite(result.percentiles[q]) else None)
        for q in sorted(result.percentiles)
    }
    return {
        "mode": "campaign",
        "summary": {
            "n_drops": n_drops,
            "availability": result.availability_fraction,
            "percentiles": percentiles,
        },
        "cdf": _decimate_cdf(result.cdf),
        "los_histogram": {str(k): v for k, v in los_histogram(result).items()},
        "worst_ue_positions": [[p[0], p[1]] for p in worst],
        "suggested_trps": suggestions,
    }


def create_app(static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="trpplan", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/presets")
    def presets() -> list[dict]:
        catalog = []
        for name in PRESET_NAMES:
            deployment = deployment_preset(name)
            entry = {"name": name}
            entry.update(deployment_to_dict(deployment))
            catalog.append(entry)
        return catalog

    @app.post("/api/evaluate")
    async def evaluate(request: Request) -> JSONResponse:
        started = time.monotonic()
        try:
            body: Any = await request.json()
        except Exception:
            return JSONResponse(
                status_code=400, content={"error": "body is not valid JSON", "field": ""}
            )
        if not isinstance(body, dict):
            return JSONResponse(
                status_code=400, content={"error": "body must be an object", "field": ""}
            )
        mode = body.get("mode", "bounds")
        try:
            deployment = _parse_deployment(body)
            noise = _parse_noise(body)
            if mode == "bounds":
                payload = _evaluate_bounds(body, deployment, noise)
            elif mode == "campaign":
                payload = _evaluate_campaign(body, deployment, noise)
            else:
                raise _SchemaError("mode", f"unknown mode {mode!r}")
        except _SchemaError as exc:
            return JSONResponse(
                status_code=400, content={"error": exc.message, "field": exc.path}
            )
        except _SemanticError as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})
        except _BudgetError as exc:
            return JSONResponse(status_code=503, content={"error": str(exc)})
        headers = {"X-Evaluation-Seconds": f"{time.monotonic() - started:.3f}"}
        return JSONResponse(status_code=200, content=payload, headers=headers)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
