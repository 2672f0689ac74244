"""Evaluation halls and TRP deployment generators.

Two 3GPP-style indoor environments are modeled: an open office hall
(ceiling-mounted radios at 3 m) and a factory hall (elevated radios at 8 m)
with sparse or dense clutter. Deployment generators produce the standard
ceiling grid, an even perimeter (wall-mounted) layout, and a mixed
perimeter-plus-interior layout, all as immutable value objects.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

__all__ = [
    "ScenarioFamily",
    "LayoutTag",
    "CarrierMetadata",
    "ScenarioSpec",
    "Trp",
    "Deployment",
    "ScenarioError",
    "preset_scenario",
    "make_standard_deployment",
    "make_edge_deployment",
    "make_mixed_deployment",
    "densify",
    "deployment_to_json",
    "deployment_from_json",
]


class ScenarioError(ValueError):
    """Invalid scenario or deployment request."""


class ScenarioFamily(str, Enum):
    IOO = "IOO"
    INF_SH = "InF-SH"
    INF_DH = "InF-DH"


class LayoutTag(str, Enum):
    STANDARD = "standard"
    EDGE = "edge"
    MIXED = "mixed"
    CUSTOM = "custom"


@dataclass(frozen=True)
class CarrierMetadata:
    """Radio parameters recorded with a scenario; not used by the geometry math."""

    carrier_frequency_hz: float = 2.0e9
    subcarrier_spacing_hz: float = 30.0e3
    n_subcarriers: int = 4096
    prs_bandwidth_hz: float = 100.0e6


@dataclass(frozen=True)
class ScenarioSpec:
    """Floor-plan geometry, mount heights and clutter statistics of one hall.

    Lengths are meters. ``clutter_density`` is the fraction of the floor
    covered by obstacles and drives the line-of-sight model for the factory
    families; the open office family carries no clutter.
    """

    family: ScenarioFamily
    x_len: float
    y_len: float
    ceiling_height: float
    trp_mount_height: float
    ue_height: float = 1.5
    clutter_density: float = 0.0
    clutter_size: float = 0.0
    clutter_height: float = 0.0
    carrier: CarrierMetadata = field(default_factory=CarrierMetadata)

    def __post_init__(self) -> None:
        if self.x_len <= 0 or self.y_len <= 0:
            raise ScenarioError("hall dimensions must be positive")
        if not (0 < self.ue_height < self.trp_mount_height <= self.ceiling_height):
            raise ScenarioError(
                "heights must satisfy 0 < ue_height < trp_mount_height <= ceiling_height"
            )
        if not (0 <= self.clutter_density < 1):
            raise ScenarioError("clutter_density must lie in [0, 1)")
        if self.clutter_height > self.ceiling_height:
            raise ScenarioError("clutter cannot exceed the ceiling")
        if self.family is ScenarioFamily.INF_DH and self.clutter_density < 0.4:
            raise ScenarioError("dense-clutter factory requires clutter_density >= 0.4")
        if self.family is ScenarioFamily.INF_SH and self.clutter_density >= 0.4:
            raise ScenarioError("sparse-clutter factory requires clutter_density < 0.4")

    def contains(self, position: Sequence[float]) -> bool:
        x, y, z = position
        return 0 <= x <= self.x_len and 0 <= y <= self.y_len and 0 <= z <= self.ceiling_height


@dataclass(frozen=True)
class Trp:
    """A transmission/reception point at a known position (meters)."""

    id: int
    position: tuple[float, float, float]

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ScenarioError("TRP id must be non-negative")
        if len(self.position) != 3:
            raise ScenarioError("TRP position must be a 3-vector")
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))


@dataclass(frozen=True)
class Deployment:
    """An ordered set of TRPs inside a parent scenario."""

    scenario: ScenarioSpec
    trps: tuple[Trp, ...]
    layout_tag: LayoutTag

    def __post_init__(self) -> None:
        object.__setattr__(self, "trps", tuple(self.trps))
        n = len(self.trps)
        if n < 4:
            raise ScenarioError("at least 4 TRPs are required for a TDOA fix")
        ids = [t.id for t in self.trps]
        if ids != list(range(n)):
            raise ScenarioError("TRP ids must be dense 0..N-1 in order")
        seen: set[tuple[float, float, float]] = set()
        for t in self.trps:
            if not self.scenario.contains(t.position):
                raise ScenarioError(f"TRP {t.id} at {t.position} lies outside the hall")
            if t.position in seen:
                raise ScenarioError(f"duplicate TRP position {t.position}")
            seen.add(t.position)

    @property
    def n_trps(self) -> int:
        return len(self.trps)

    def positions(self) -> list[tuple[float, float, float]]:
        return [t.position for t in self.trps]


_IOO_PRESET = dict(x_len=120.0, y_len=50.0, ceiling_height=3.0, trp_mount_height=3.0)
# Factory ceiling is allowed anywhere in 5-25 m; 10 m keeps the 3D geometry
# nondegenerate with radios mounted at 8 m.
_INF_PRESET = dict(x_len=120.0, y_len=60.0, ceiling_height=10.0, trp_mount_height=8.0)


def preset_scenario(family: ScenarioFamily | str) -> ScenarioSpec:
    """Return the built-in hall description for one scenario family.

    Open office: 120 x 50 m, 3 m ceiling, light furniture clutter. Factory:
    120 x 60 m, radios at 8 m; sparse clutter is 20% coverage of 10 m
    objects, dense clutter 60% coverage of 2 m objects, both 6 m tall.
    """
    family = ScenarioFamily(family)
    if family is ScenarioFamily.IOO:
        return ScenarioSpec(
            family=family,
            clutter_density=0.04,
            clutter_size=2.0,
            clutter_height=1.5,
            **_IOO_PRESET,
        )
    if family is ScenarioFamily.INF_SH:
        return ScenarioSpec(
            family=family,
            clutter_density=0.2,
            clutter_size=10.0,
            clutter_height=6.0,
            **_INF_PRESET,
        )
    return ScenarioSpec(
        family=family,
        clutter_density=0.6,
        clutter_size=2.0,
        clutter_height=6.0,
        **_INF_PRESET,
    )


def _grid_shape(n_trps: int, aspect: float) -> tuple[int, int]:
    """Pick the rows x cols factorization whose aspect is closest to the hall's."""
    best: tuple[float, int, int] | None = None
    for rows in range(2, int(math.isqrt(n_trps)) + 1):
        if n_trps % rows:
            continue
        cols = n_trps // rows
        for r, c in ((rows, cols), (cols, rows)):
            if r < 2 or c < 2:
                continue
            score = abs(c / r - aspect)
            if best is None or score < best[0] or (score == best[0] and c > best[2]):
                best = (score, r, c)
    if best is None:
        raise ScenarioError(
            f"{n_trps} TRPs cannot form a rows x cols grid with at least 2 rows "
            "and 2 columns; choose a composite count"
        )
    return best[1], best[2]


def make_standard_deployment(scenario: ScenarioSpec, n_trps: int) -> Deployment:
    """Regular ceiling grid.

    The 3GPP counts (12 in the office hall, 18 in the factory hall) use the
    exact 20 m inter-site distance on both axes with the grid centered in
    the hall. Other counts scale the grid per axis so each TRP sits at the
    center of an equal cell (margin of half a spacing to the walls).
    """
    is_3gpp = (scenario.family is ScenarioFamily.IOO and n_trps == 12) or (
        scenario.family is not ScenarioFamily.IOO and n_trps == 18
    )
    if is_3gpp:
        rows, cols = (2, 6) if n_trps == 12 else (3, 6)
        isd = 20.0
        x0 = (scenario.x_len - (cols - 1) * isd) / 2.0
        y0 = (scenario.y_len - (rows - 1) * isd) / 2.0
        xs = [x0 + c * isd for c in range(cols)]
        ys = [y0 + r * isd for r in range(rows)]
    else:
        rows, cols = _grid_shape(n_trps, scenario.x_len / scenario.y_len)
        xs = [scenario.x_len * (c + 0.5) / cols for c in range(cols)]
        ys = [scenario.y_len * (r + 0.5) / rows for r in range(rows)]
    z = scenario.trp_mount_height
    trps = [
        Trp(id=r * cols + c, position=(xs[c], ys[r], z))
        for r in range(rows)
        for c in range(cols)
    ]
    return Deployment(scenario=scenario, trps=tuple(trps), layout_tag=LayoutTag.STANDARD)


def _perimeter_point(scenario: ScenarioSpec, arc: float) -> tuple[float, float]:
    """Map an arc-length coordinate (counterclockwise from (0,0)) to the wall."""
    x_len, y_len = scenario.x_len, scenario.y_len
    perimeter = 2.0 * (x_len + y_len)
    arc = arc % perimeter
    if arc < x_len:
        return (arc, 0.0)
    arc -= x_len
    if arc < y_len:
        return (x_len, arc)
    arc -= y_len
    if arc < x_len:
        return (x_len - arc, y_len)
    arc -= x_len
    return (0.0, y_len - arc)


def make_edge_deployment(scenario: ScenarioSpec, n_trps: int) -> Deployment:
    """Wall-mounted TRPs spread evenly along the hall perimeter.

    Counts divisible by 4 anchor one TRP on each corner and split the rest
    between the wall pairs in proportion to wall length, evenly spaced
    within each wall; this covers the hall corners, where perimeter layouts
    are otherwise weakest. Other counts fall back to an even arc-length
    partition offset half a spacing from the (0,0) corner. Both patterns
    are invariant under a 180-degree rotation of the hall for even counts.
    """
    if n_trps < 4:
        raise ScenarioError("edge deployment needs at least 4 TRPs")
    x_len, y_len, z = scenario.x_len, scenario.y_len, scenario.trp_mount_height
    xy: list[tuple[float, float]]
    if n_trps % 4 == 0:
        xy = [(0.0, 0.0), (x_len, 0.0), (x_len, y_len), (0.0, y_len)]
        per_pair = (n_trps - 4) // 2
        n_long = round(per_pair * x_len / (x_len + y_len))
        n_short = per_pair - n_long
        for j in range(1, n_long + 1):
            x = x_len * j / (n_long + 1)
            xy += [(x, 0.0), (x, y_len)]
        for j in range(1, n_short + 1):
            y = y_len * j / (n_short + 1)
            xy += [(x_len, y), (0.0, y)]
        # Order counterclockwise from the origin so ids trace the perimeter.
        perimeter = 2.0 * (x_len + y_len)

        def arc_of(p: tuple[float, float]) -> float:
            x, y = p
            if y == 0.0:
                return x
            if x == x_len:
                return x_len + y
            if y == y_len:
                return x_len + y_len + (x_len - x)
            return perimeter - y

        xy.sort(key=arc_of)
    else:
        perimeter = 2.0 * (x_len + y_len)
        spacing = perimeter / n_trps
        xy = [_perimeter_point(scenario, (i + 0.5) * spacing) for i in range(n_trps)]
    trps = [Trp(id=i, position=(x, y, z)) for i, (x, y) in enumerate(xy)]
    return Deployment(scenario=scenario, trps=tuple(trps), layout_tag=LayoutTag.EDGE)


# Interior offsets from the hall center for the mixed layouts. The factory
# hall spreads its interior TRPs wider than the office hall.
_MIXED_INTERIOR_OFFSETS = {
    ScenarioFamily.IOO: (20.0, 10.0),
    ScenarioFamily.INF_SH: (30.0, 15.0),
    ScenarioFamily.INF_DH: (30.0, 15.0),
}


def make_mixed_deployment(scenario: ScenarioSpec) -> Deployment:
    """12 TRPs: four corners, two midspan points per long wall, four interior.

    Interior TRPs sit symmetrically around the hall center at the mount
    height; their offsets differ between the office and factory halls.
    """
    x_len, y_len, z = scenario.x_len, scenario.y_len, scenario.trp_mount_height
    perimeter_xy = [
        (0.0, 0.0),
        (x_len, 0.0),
        (x_len, y_len),
        (0.0, y_len),
        (x_len / 3.0, 0.0),
        (2.0 * x_len / 3.0, 0.0),
        (x_len / 3.0, y_len),
        (2.0 * x_len / 3.0, y_len),
    ]
    dx, dy = _MIXED_INTERIOR_OFFSETS[scenario.family]
    cx, cy = x_len / 2.0, y_len / 2.0
    interior_xy = [(cx - dx, cy - dy), (cx + dx, cy - dy), (cx - dx, cy + dy), (cx + dx, cy + dy)]
    trps = [
        Trp(id=i, position=(x, y, z)) for i, (x, y) in enumerate(perimeter_xy + interior_xy)
    ]
    return Deployment(scenario=scenario, trps=tuple(trps), layout_tag=LayoutTag.MIXED)


def densify(deployment: Deployment, new_positions: Sequence[Sequence[float]]) -> Deployment:
    """Append TRPs at the given positions; ids continue from N.

    The input deployment is unchanged. Positions outside the hall or
    duplicating an existing TRP are rejected.
    """
    if not new_positions:
        return deployment
    existing = set(deployment.positions())
    trps = list(deployment.trps)
    next_id = len(trps)
    for pos in new_positions:
        pos = tuple(float(c) for c in pos)
        if len(pos) != 3:
            raise ScenarioError("new TRP positions must be 3-vectors")
        if not deployment.scenario.contains(pos):
            raise ScenarioError(f"new TRP position {pos} lies outside the hall")
        if pos in existing:
            raise ScenarioError(f"new TRP position {pos} duplicates an existing TRP")
        trps.append(Trp(id=next_id, position=pos))
        existing.add(pos)
        next_id += 1
    return replace(deployment, trps=tuple(trps), layout_tag=LayoutTag.CUSTOM)


# --- JSON round trip -------------------------------------------------------

def scenario_to_dict(scenario: ScenarioSpec) -> dict:
    return {
        "family": scenario.family.value,
        "x_len_m": scenario.x_len,
        "y_len_m": scenario.y_len,
        "ceiling_height_m": scenario.ceiling_height,
        "trp_mount_height_m": scenario.trp_mount_height,
        "ue_height_m": scenario.ue_height,
        "clutter_density": scenario.clutter_density,
        "clutter_size_m": scenario.clutter_size,
        "clutter_height_m": scenario.clutter_height,
        "carrier": {
            "carrier_frequency_hz": scenario.carrier.carrier_frequency_hz,
            "subcarrier_spacing_hz": scenario.carrier.subcarrier_spacing_hz,
            "n_subcarriers": scenario.carrier.n_subcarriers,
            "prs_bandwidth_hz": scenario.carrier.prs_bandwidth_hz,
        },
    }


def scenario_from_dict(data: dict) -> ScenarioSpec:
    carrier = CarrierMetadata(**data["carrier"]) if "carrier" in data else CarrierMetadata()
    return ScenarioSpec(
        family=ScenarioFamily(data["family"]),
        x_len=data["x_len_m"],
        y_len=data["y_len_m"],
        ceiling_height=data["ceiling_height_m"],
        trp_mount_height=data["trp_mount_height_m"],
        ue_height=data.get("ue_height_m", 1.5),
        clutter_density=data.get("clutter_density", 0.0),
        clutter_size=data.get("clutter_size_m", 0.0),
        clutter_height=data.get("clutter_height_m", 0.0),
        carrier=carrier,
    )


def deployment_to_dict(deployment: Deployment) -> dict:
    return {
        "scenario": scenario_to_dict(deployment.scenario),
        "trps": [
            {"id": t.id, "x": t.position[0], "y": t.position[1], "z": t.position[2]}
            for t in deployment.trps
        ],
        "layout": deployment.layout_tag.value,
    }


def deployment_from_dict(data: dict) -> Deployment:
    scenario = scenario_from_dict(data["scenario"])
    trps = tuple(
        Trp(id=entry["id"], position=(entry["x"], entry["y"], entry["z"]))
        for entry in sorted(data["trps"], key=lambda e: e["id"])
    )
    return Deployment(scenario=scenario, trps=trps, layout_tag=LayoutTag(data["layout"]))


def deployment_to_json(deployment: Deployment, indent: int | None = None) -> str:
    return json.dumps(deployment_to_dict(deployment), indent=indent)


def deployment_from_json(text: str) -> Deployment:
    return deployment_from_dict(json.loads(text))
