"""Named scenario + deployment presets shared by the CLI and the service."""

from __future__ import annotations

from .scenario import (
    Deployment,
    LayoutTag,
    ScenarioFamily,
    make_edge_deployment,
    make_mixed_deployment,
    make_standard_deployment,
    preset_scenario,
)

__all__ = ["PRESET_NAMES", "deployment_preset"]

_FAMILY_SLUGS = {
    "ioo": ScenarioFamily.IOO,
    "inf-sh": ScenarioFamily.INF_SH,
    "inf-dh": ScenarioFamily.INF_DH,
}

PRESET_NAMES = tuple(
    f"{slug}-{layout}-12" for slug in _FAMILY_SLUGS for layout in ("standard", "edge", "mixed")
)


def deployment_preset(name: str) -> Deployment:
    """Build one of the named 12-TRP evaluation deployments."""
    parts = name.rsplit("-", 2)
    if len(parts) != 3 or parts[0] not in _FAMILY_SLUGS or parts[2] != "12":
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    scenario = preset_scenario(_FAMILY_SLUGS[parts[0]])
    layout = LayoutTag(parts[1])
    if layout is LayoutTag.STANDARD:
        return make_standard_deployment(scenario, 12)
    if layout is LayoutTag.EDGE:
        return make_edge_deployment(scenario, 12)
    if layout is LayoutTag.MIXED:
        return make_mixed_deployment(scenario)
    raise KeyError(f"unknown preset {name!r}")
