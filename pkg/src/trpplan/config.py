"""The JSON run-configuration schema shared by the CLI and the service.

One document describes what to evaluate: a scenario (by preset name or
inline), one or more deployments (generated or explicit TRP lists), the
noise model, and the campaign/bounds parameters. Validation raises
:class:`ConfigError` with a dotted field path so callers can report the
offending location.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .campaign import MeasurementMode
from .channel import NoiseModel
from .estimator import SolveOptions
from .presets import deployment_preset
from .scenario import (
    Deployment,
    LayoutTag,
    ScenarioError,
    ScenarioSpec,
    Trp,
    make_edge_deployment,
    make_mixed_deployment,
    make_standard_deployment,
    preset_scenario,
    scenario_from_dict,
)

__all__ = ["ConfigError", "RunConfig", "DeploymentRequest", "load_config", "parse_config", "config_digest"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Configuration document rejected; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class DeploymentRequest:
    label: str
    deployment: Deployment


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioSpec
    deployments: tuple[DeploymentRequest, ...]
    noise: NoiseModel
    n_drops: int = 10_000
    measurement_mode: MeasurementMode = MeasurementMode.ALL_TRPS
    ue_height: float | None = None
    seed: int = 0
    cell_size: float = 1.0
    solve_options: SolveOptions = field(default_factory=SolveOptions)


def _require(data: dict, key: str, path: str) -> Any:
    if key not in data:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return data[key]


def _build_deployment(entry: Any, scenario: ScenarioSpec, path: str) -> DeploymentRequest:
    if isinstance(entry, str):
        try:
            dep = deployment_preset(entry)
        except KeyError as exc:
            raise ConfigError(path, str(exc)) from None
        return DeploymentRequest(label=entry, deployment=dep)
    if not isinstance(entry, dict):
        raise ConfigError(path, "deployment must be a preset name or an object")
    layout = _require(entry, "layout", path)
    try:
        tag = LayoutTag(layout)
    except ValueError:
        raise ConfigError(f"{path}.layout", f"unknown layout {layout!r}") from None
    label = entry.get("label", layout)
    try:
        if tag is LayoutTag.CUSTOM:
            trps_field = _require(entry, "trps", path)
            trps = tuple(
                Trp(id=i, position=(t["x"], t["y"], t["z"]))
                for i, t in enumerate(trps_field)
            )
            dep = Deployment(scenario=scenario, trps=trps, layout_tag=tag)
        elif tag is LayoutTag.MIXED:
            dep = make_mixed_deployment(scenario)
        else:
            n = entry.get("n_trps", 12)
            if not isinstance(n, int) or n < 4:
                raise ConfigError(f"{path}.n_trps", "need an integer >= 4")
            if tag is LayoutTag.STANDARD:
                dep = make_standard_deployment(scenario, n)
            else:
                dep = make_edge_deployment(scenario, n)
    except ScenarioError as exc:
        raise ConfigError(path, str(exc)) from None
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}.trps", f"malformed TRP list: {exc}") from None
    return DeploymentRequest(label=label, deployment=dep)


def parse_config(data: Any, seed_override: int | None = None) -> RunConfig:
    """Validate a parsed JSON document into a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("", "top-level document must be an object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version}")

    scenario_field = _require(data, "scenario", "")
    if isinstance(scenario_field, str):
        try:
            scenario = preset_scenario(scenario_field)
        except ValueError:
            raise ConfigError("scenario", f"unknown scenario family {scenario_field!r}") from None
    elif isinstance(scenario_field, dict):
        try:
            scenario = scenario_from_dict(scenario_field)
        except (KeyError, ScenarioError, ValueError) as exc:
            raise ConfigError("scenario", str(exc)) from None
    else:
        raise ConfigError("scenario", "must be a family name or an object")

    if "deployments" in data:
        entries = data["deployments"]
        if not isinstance(entries, list) or not entries:
            raise ConfigError("deployments", "must be a non-empty list")
        deployments = tuple(
            _build_deployment(e, scenario, f"deployments[{i}]") for i, e in enumerate(entries)
        )
    elif "deployment" in data:
        deployments = (_build_deployment(data["deployment"], scenario, "deployment"),)
    else:
        raise ConfigError("deployment", "missing required field")
    labels = [d.label for d in deployments]
    if len(set(labels)) != len(labels):
        raise ConfigError("deployments", "deployment labels must be unique")

    noise_field = data.get("noise", {})
    if not isinstance(noise_field, dict):
        raise ConfigError("noise", "must be an object")
    try:
        noise = NoiseModel(
            sigma_toa=float(noise_field.get("sigma_toa_m", 0.2)),
            nlos_bias_mean=float(noise_field.get("nlos_bias_mean_m", 2.0)),
            clock_bias=float(noise_field.get("clock_bias_m", 0.0)),
            seed=int(noise_field.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError("noise", str(exc)) from None

    campaign_field = data.get("campaign", {})
    if not isinstance(campaign_field, dict):
        raise ConfigError("campaign", "must be an object")
    n_drops = campaign_field.get("n_drops", 10_000)
    if not isinstance(n_drops, int) or n_drops < 1:
        raise ConfigError("campaign.n_drops", "need an integer >= 1")
    mode_field = campaign_field.get("measurement_mode", "all_trps")
    try:
        mode = MeasurementMode(mode_field)
    except ValueError:
        raise ConfigError("campaign.measurement_mode", f"unknown mode {mode_field!r}") from None
    ue_height = campaign_field.get("ue_height_m")
    if ue_height is not None and not (0 < float(ue_height) < scenario.ceiling_height):
        raise ConfigError("campaign.ue_height_m", "must lie between floor and ceiling")

    solver_field = data.get("solver", {})
    if not isinstance(solver_field, dict):
        raise ConfigError("solver", "must be an object")
    solve_options = SolveOptions(
        max_iterations=int(solver_field.get("max_iterations", 50)),
        step_tolerance_m=float(solver_field.get("step_tolerance_m", 1e-6)),
        solve_3d=bool(solver_field.get("solve_3d", False)),
    )

    bounds_field = data.get("bounds", {})
    if not isinstance(bounds_field, dict):
        raise ConfigError("bounds", "must be an object")
    cell_size = float(bounds_field.get("cell_size_m", 1.0))
    if cell_size <= 0:
        raise ConfigError("bounds.cell_size_m", "must be positive")

    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed", "must be an integer")
    if seed_override is not None:
        seed = seed_override

    return RunConfig(
        scenario=scenario,
        deployments=deployments,
        noise=noise,
        n_drops=n_drops,
        measurement_mode=mode,
        ue_height=None if ue_height is None else float(ue_height),
        seed=seed,
        cell_size=cell_size,
        solve_options=solve_options,
    )


def load_config(path: str | Path, seed_override: int | None = None) -> RunConfig:
    """Parse and validate a config file; JSON errors carry line/column info."""
    text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text)
    return parse_config(data, seed_override=seed_override)


def config_digest(path: str | Path, seed_override: int | None = None) -> str:
    """Stable digest of the canonicalized config document (plus seed override)."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if seed_override is not None:
        data["seed"] = seed_override
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
