"""Monte Carlo evaluation campaigns over random UE drops.

Each drop places a UE uniformly in the hall at a fixed height, draws
line-of-sight states, synthesizes TDOA measurements and solves for the
position. Every random draw comes from a stream keyed by (seed, drop
index, purpose), so results are bit-identical regardless of worker count
and stay on common random numbers when TRPs are appended.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .channel import (
    STREAM_CLUSTER,
    STREAM_LOS,
    STREAM_POSITION,
    STREAM_TOA,
    MeasurementSet,
    NoiseModel,
    UeDrop,
    UnavailableFixError,
    filter_los_only,
    form_tdoa,
    nearest_trp,
    rng_stream,
    sample_los_states,
    synthesize_toas,
)
from .estimator import SolveOptions, initial_guess, solve_tdoa
from .scenario import (
    Deployment,
    LayoutTag,
    ScenarioSpec,
    densify,
    make_edge_deployment,
    make_standard_deployment,
)

__all__ = [
    "MeasurementMode",
    "CampaignConfig",
    "DropRecord",
    "CampaignResult",
    "run_campaign",
    "percentile",
    "los_histogram",
    "worst_ue_locations",
    "densification_step",
    "densification_sweep",
    "drops_to_csv",
    "cdf_to_csv",
    "percentiles_to_csv",
    "los_histogram_to_csv",
]

SUMMARY_QUANTILES = (0.8, 0.9, 0.95)


class MeasurementMode(str, Enum):
    ALL_TRPS = "all_trps"
    LOS_ONLY = "los_only"


@dataclass(frozen=True)
class CampaignConfig:
    deployment: Deployment
    noise: NoiseModel
    n_drops: int = 10_000
    ue_height: float | None = None
    measurement_mode: MeasurementMode = MeasurementMode.ALL_TRPS
    seed: int = 0
    solve_options: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self) -> None:
        if self.n_drops < 1:
            raise ValueError("n_drops must be at least 1")

    @property
    def drop_height(self) -> float:
        return self.deployment.scenario.ue_height if self.ue_height is None else self.ue_height


@dataclass(frozen=True)
class DropRecord:
    index: int
    true_position: tuple[float, float, float]
    estimate: tuple[float, float, float] | None
    horizontal_error: float | None
    n_los_links: int
    available: bool
    converged: bool


@dataclass(frozen=True, eq=False)
class CampaignResult:
    """Per-drop records plus the error CDF over drops that produced a fix."""

    drops: tuple[DropRecord, ...]
    cdf: np.ndarray
    percentiles: dict[float, float]
    availability_fraction: float


def _run_drop(config: CampaignConfig, index: int) -> DropRecord:
    deployment = config.deployment
    scenario = deployment.scenario
    pos_rng = rng_stream(config.seed, index, STREAM_POSITION)
    x = pos_rng.random() * scenario.x_len
    y = pos_rng.random() * scenario.y_len
    true_pos = (x, y, config.drop_height)

    los_rng = rng_stream(config.seed, index, STREAM_LOS)
    flags = sample_los_states(deployment, true_pos, los_rng)
    ue = UeDrop(position=true_pos, los_flags=flags)
    n_los = sum(flags)

    toa_rng = rng_stream(config.seed, index, STREAM_TOA)
    toas = synthesize_toas(deployment, ue, config.noise, toa_rng)

    los_ids = [i for i, f in enumerate(flags) if f]
    ref = nearest_trp(deployment, true_pos, candidates=los_ids or None)
    measurements: MeasurementSet = form_tdoa(toas, ref, config.noise)
    if config.measurement_mode is MeasurementMode.LOS_ONLY:
        try:
            measurements = filter_los_only(measurements, ue, deployment)
        except UnavailableFixError:
            return DropRecord(
                index=index,
                true_position=true_pos,
                estimate=None,
                horizontal_error=None,
                n_los_links=n_los,
                available=False,
                converged=False,
            )

    init = initial_guess(measurements, deployment)
    fix = solve_tdoa(measurements, deployment, init, config.solve_options)
    err = math.hypot(fix.estimate[0] - true_pos[0], fix.estimate[1] - true_pos[1])
    return DropRecord(
        index=index,
        true_position=true_pos,
        estimate=fix.estimate,
        horizontal_error=err,
        n_los_links=n_los,
        available=True,
        converged=fix.converged,
    )


def run_campaign(config: CampaignConfig, n_workers: int = 1) -> CampaignResult:
    """Evaluate every drop and aggregate the error distribution.

    Unavailable fixes (too few usable links) are excluded from the CDF and
    surface only through ``availability_fraction``.
    """
    indices = range(config.n_drops)
    if n_workers <= 1:
        drops = [_run_drop(config, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            drops = list(pool.map(lambda i: _run_drop(config, i), indices))
    errors = np.sort(
        np.array([d.horizontal_error for d in drops if d.available], dtype=float)
    )
    percentiles = {
        q: _quantile(errors, q) if errors.size else math.nan for q in SUMMARY_QUANTILES
    }
    available = sum(1 for d in drops if d.available)
    return CampaignResult(
        drops=tuple(drops),
        cdf=errors,
        percentiles=percentiles,
        availability_fraction=available / config.n_drops,
    )


def _quantile(sorted_values: np.ndarray, q: float) -> float:
    # Linear interpolation between order statistics at rank q*(n-1) (0-based).
    n = sorted_values.size
    if n == 0:
        raise ValueError("empty distribution")
    rank = q * (n - 1)
    lo = int(math.floor(rank))
    hi = min(lo + 1, n - 1)
    frac = rank - lo
    return float(sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac)


def percentile(result: CampaignResult, q: float) -> float:
    """Empirical quantile of the horizontal error over available drops."""
    if not (0.0 <= q <= 1.0):
        raise ValueError("quantile must lie in [0, 1]")
    if result.cdf.size == 0:
        raise ValueError("campaign produced no available fixes")
    return _quantile(result.cdf, q)


def los_histogram(result: CampaignResult) -> dict[int, int]:
    """Number of drops per LOS-link count, including empty bins up to max."""
    counts: dict[int, int] = {}
    max_links = 0
    for d in result.drops:
        counts[d.n_los_links] = counts.get(d.n_los_links, 0) + 1
        max_links = max(max_links, d.n_los_links)
    return {k: counts.get(k, 0) for k in range(max_links + 1)}


def worst_ue_locations(result: CampaignResult, fraction: float) -> list[tuple[float, float, float]]:
    """True positions of the worst ceil(f*n) available drops, worst first."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError("fraction must lie in (0, 1]")
    scored = [(d.horizontal_error, d.index, d.true_position) for d in result.drops if d.available]
    if not scored:
        return []
    scored.sort(key=lambda t: (-t[0], t[1]))
    take = math.ceil(fraction * len(scored))
    return [pos for _, _, pos in scored[:take]]


def _k_medoids(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Plain Lloyd-style k-medoids on 2D points; deterministic given the rng."""
    unique = np.unique(points, axis=0)
    k = min(k, unique.shape[0])
    # Greedy farthest-point seeding from a seeded start keeps runs reproducible.
    start = int(rng.integers(unique.shape[0]))
    medoids = [unique[start]]
    while len(medoids) < k:
        d = np.min(
            np.linalg.norm(unique[:, None, :] - np.asarray(medoids)[None, :, :], axis=2), axis=1
        )
        medoids.append(unique[int(np.argmax(d))])
    medoids = np.asarray(medoids)
    for _ in range(100):
        d = np.linalg.norm(points[:, None, :] - medoids[None, :, :], axis=2)
        assign = np.argmin(d, axis=1)
        new_medoids = medoids.copy()
        for j in range(k):
            members = points[assign == j]
            if members.shape[0] == 0:
                continue
            pairwise = np.linalg.norm(members[:, None, :] - members[None, :, :], axis=2)
            new_medoids[j] = members[int(np.argmin(pairwise.sum(axis=1)))]
        if np.allclose(new_medoids, medoids):
            break
        medoids = new_medoids
    return medoids


def densification_step(
    config: CampaignConfig,
    result: CampaignResult,
    k: int,
    worst_fraction: float = 0.1,
) -> Deployment:
    """Propose k TRPs at the medoids of the worst-UE cluster partition.

    New TRPs mount at the scenario TRP height above the chosen floor
    points. If every worst UE coincides, a single TRP is placed there.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    worst = worst_ue_locations(result, worst_fraction)
    if not worst:
        raise ValueError("no available drops to densify against")
    points = np.asarray([(p[0], p[1]) for p in worst], dtype=float)
    rng = rng_stream(config.seed, 0, STREAM_CLUSTER)
    medoids = _k_medoids(points, k, rng)
    deployment = config.deployment
    existing = set(deployment.positions())
    z = deployment.scenario.trp_mount_height
    new_positions = []
    for x, y in medoids:
        pos = (float(x), float(y), z)
        while pos in existing:
            pos = (pos[0] + 0.01, pos[1], z)  # medoid collides with a TRP
        new_positions.append(pos)
        existing.add(pos)
    return densify(deployment, new_positions)


def densification_sweep(
    scenario: ScenarioSpec,
    layout: LayoutTag,
    counts: list[int],
    noise: NoiseModel,
    n_drops: int = 10_000,
    seed: int = 0,
    measurement_mode: MeasurementMode = MeasurementMode.ALL_TRPS,
    n_workers: int = 1,
) -> list[dict]:
    """Percentile-vs-count table for a growing deployment of one layout family."""
    if counts != sorted(counts):
        raise ValueError("counts must be ascending")
    rows = []
    for count in counts:
        if layout is LayoutTag.STANDARD:
            deployment = make_standard_deployment(scenario, count)
        elif layout is LayoutTag.EDGE:
            deployment = make_edge_deployment(scenario, count)
        else:
            raise ValueError("densification sweep supports the standard and edge layouts")
        config = CampaignConfig(
            deployment=deployment,
            noise=noise,
            n_drops=n_drops,
            measurement_mode=measurement_mode,
            seed=seed,
        )
        result = run_campaign(config, n_workers=n_workers)
        row = {"n_trps": count, "availability": result.availability_fraction}
        for q in SUMMARY_QUANTILES:
            row[f"p{int(q * 100)}_m"] = result.percentiles[q]
        rows.append(row)
    return rows


# --- CSV exports -----------------------------------------------------------

def _fmt(value: float) -> str:
    return f"{value:.6g}"


def drops_to_csv(result: CampaignResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "drop",
            "true_x_m",
            "true_y_m",
            "true_z_m",
            "est_x_m",
            "est_y_m",
            "est_z_m",
            "horizontal_error_m",
            "n_los_links",
            "available",
            "converged",
        ]
    )
    for d in result.drops:
        est = ["", "", ""] if d.estimate is None else [_fmt(c) for c in d.estimate]
        writer.writerow(
            [
                d.index,
                _fmt(d.true_position[0]),
                _fmt(d.true_position[1]),
                _fmt(d.true_position[2]),
                *est,
                "" if d.horizontal_error is None else _fmt(d.horizontal_error),
                d.n_los_links,
                int(d.available),
                int(d.converged),
            ]
        )
    return buf.getvalue()


def cdf_to_csv(result: CampaignResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["error_m", "cumulative_probability"])
    n = result.cdf.size
    for i, err in enumerate(result.cdf, start=1):
        writer.writerow([_fmt(err), _fmt(i / n)])
    return buf.getvalue()


def percentiles_to_csv(rows: list[tuple[str, CampaignResult]]) -> str:
    """Table-shaped summary: one labeled row per campaign."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["deployment"] + [f"p{int(q * 100)}_m" for q in SUMMARY_QUANTILES] + ["availability"]
    writer.writerow(header)
    for label, result in rows:
        writer.writerow(
            [label]
            + [_fmt(result.percentiles[q]) for q in SUMMARY_QUANTILES]
            + [_fmt(result.availability_fraction)]
        )
    return buf.getvalue()


def los_histogram_to_csv(result: CampaignResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n_los_links", "n_drops"])
    for links, count in los_histogram(result).items():
        writer.writerow([links, count])
    return buf.getvalue()
