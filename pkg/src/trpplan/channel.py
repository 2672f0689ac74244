"""Stochastic line-of-sight states and TOA/TDOA measurement synthesis.

Propagation enters only through two effects: additive white Gaussian
ranging noise on every link, and a positive exponential excess-path bias on
links whose line of sight is blocked. Line-of-sight states are Bernoulli
draws from distance-dependent probabilities fitted to the indoor-office and
indoor-factory channel families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .scenario import Deployment, ScenarioFamily, ScenarioSpec, Trp

__all__ = [
    "NoiseModel",
    "UeDrop",
    "MeasurementSet",
    "UnavailableFixError",
    "rng_stream",
    "los_probability",
    "sample_los_states",
    "synthesize_toa",
    "synthesize_toas",
    "form_tdoa",
    "filter_los_only",
    "nearest_trp",
    "STREAM_POSITION",
    "STREAM_LOS",
    "STREAM_TOA",
    "STREAM_CLUSTER",
]

# Purpose tags for derived RNG streams; campaigns key every draw by
# (seed, drop index, purpose) so results do not depend on evaluation order.
STREAM_POSITION = 1
STREAM_LOS = 2
STREAM_TOA = 3
STREAM_CLUSTER = 4


class UnavailableFixError(RuntimeError):
    """Raised when fewer than 4 usable TRPs remain for a position fix."""


def rng_stream(seed: int, drop_index: int = 0, purpose: int = 0) -> np.random.Generator:
    """Independent, reproducible generator for one (seed, drop, purpose) triple."""
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(drop_index), int(purpose))))


@dataclass(frozen=True)
class NoiseModel:
    """Measurement error model, all quantities expressed in meters.

    ``sigma_toa`` is the std of the Gaussian ranging error on each TOA;
    ``nlos_bias_mean`` the mean of the exponential excess-path offset added
    on blocked links; ``clock_bias`` a common UE-network offset that cancels
    in TDOA under synchronized TRPs.
    """

    sigma_toa: float = 0.2
    nlos_bias_mean: float = 2.0
    clock_bias: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma_toa <= 0:
            raise ValueError("sigma_toa must be positive")
        if self.nlos_bias_mean < 0:
            raise ValueError("nlos_bias_mean must be non-negative")


@dataclass(frozen=True)
class UeDrop:
    """One UE position plus its per-TRP line-of-sight flags."""

    position: tuple[float, float, float]
    los_flags: tuple[bool, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        object.__setattr__(self, "los_flags", tuple(bool(f) for f in self.los_flags))


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """TDOA observations of one UE against a reference TRP.

    ``values[k]`` is the range difference for the k-th non-reference TRP in
    ``used_trps`` order; R is the (N-1)x(N-1) noise covariance carrying the
    common-reference correlation.
    """

    ref_trp: int
    values: np.ndarray
    covariance: np.ndarray
    used_trps: tuple[int, ...]
    sigma_toa: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "used_trps", tuple(int(i) for i in self.used_trps))
        m = values.shape[0]
        if cov.shape != (m, m):
            raise ValueError("covariance dimension must match the measurement count")
        if not np.all(np.isfinite(values)):
            raise ValueError("TDOA values must be finite")
        if not np.allclose(cov, cov.T):
            raise ValueError("covariance must be symmetric")

    @property
    def non_ref_trps(self) -> tuple[int, ...]:
        return tuple(i for i in self.used_trps if i != self.ref_trp)


def _d2(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


# Office clutter (desks, partitions) thins out near the walls, so a
# wall-mounted radio sees roughly half the obstruction density of one deep
# in the room. Links from such radios use a shortened effective path; the
# factor ramps to 1 within this clearance distance of a wall.
_WALL_CLEARANCE_M = 5.0


def _wall_exposure(scenario: ScenarioSpec, trp: Trp) -> float:
    x, y = trp.position[0], trp.position[1]
    wall_dist = min(x, scenario.x_len - x, y, scenario.y_len - y)
    return 0.5 + 0.5 * min(wall_dist / _WALL_CLEARANCE_M, 1.0)


def los_probability(scenario: ScenarioSpec, trp: Trp, ue_position: Sequence[float]) -> float:
    """Probability that the TRP-UE link is line of sight.

    Open office: the indoor-office piecewise-exponential model (certain LOS
    within 5 m, decay constants 70.8 m then 211.7 m past 49 m) evaluated at
    the wall-exposure-scaled distance, so wall-mounted radios keep LOS
    further out. Factory: exp(-d2D/k) where k is set by the clutter size
    and density, with the elevated-radio correction applied in the sparse
    hall where radios sit above the clutter; factory clutter reaches the
    walls, so no exposure scaling applies.

    Monotonically non-increasing in the horizontal distance for any fixed
    TRP and scenario.
    """
    d = _d2(trp.position, ue_position)
    if scenario.family is ScenarioFamily.IOO:
        d *= _wall_exposure(scenario, trp)
        if d <= 5.0:
            return 1.0
        if d <= 49.0:
            return math.exp(-(d - 5.0) / 70.8)
        # Continuous continuation of the 5..49 m branch (the commonly quoted
        # 0.54 prefactor is this value rounded).
        return math.exp(-44.0 / 70.8) * math.exp(-(d - 49.0) / 211.7)
    k = -scenario.clutter_size / math.log1p(-scenario.clutter_density)
    if scenario.family is ScenarioFamily.INF_SH:
        k *= (scenario.trp_mount_height - scenario.ue_height) / (
            scenario.clutter_height - scenario.ue_height
        )
    return math.exp(-d / k)


def sample_los_states(
    deployment: Deployment,
    ue_position: Sequence[float],
    rng: np.random.Generator,
) -> tuple[bool, ...]:
    """Independent Bernoulli LOS draw per TRP, consumed in TRP id order.

    Appending TRPs to a deployment leaves the draws of existing ids
    unchanged for the same stream, which keeps densification comparisons on
    common random numbers.
    """
    u = rng.random(deployment.n_trps)
    return tuple(
        bool(u[i] < los_probability(deployment.scenario, trp, ue_position))
        for i, trp in enumerate(deployment.trps)
    )


# Link length at which the noise model's excess-path mean is read as-is.
NLOS_REFERENCE_DISTANCE_M = 20.0


def nlos_excess_mean(
    noise: NoiseModel, d_2d: float, scenario: ScenarioSpec | None
) -> float:
    """Mean excess path of a blocked link of the given horizontal length.

    A blocked signal detours around obstructions, so the accumulated extra
    path grows with the link length and with how much of the floor is
    occupied: the clutter odds r/(1-r). The noise model's mean is the
    excess of a 20 m link at unit odds. Lightly furnished office floors
    (odds ~0.1) keep offsets sub-meter, while the dense factory multiplies
    them up; that contrast is what separates the two factory halls so
    sharply. Without a scenario the odds default to 1.
    """
    if scenario is None:
        odds = 1.0
    else:
        r = scenario.clutter_density
        odds = r / (1.0 - r)
    return noise.nlos_bias_mean * odds * d_2d / NLOS_REFERENCE_DISTANCE_M


def synthesize_toa(
    trp: Trp,
    ue: UeDrop,
    noise: NoiseModel,
    rng: np.random.Generator,
    scenario: ScenarioSpec | None = None,
) -> float:
    """One TOA observation in meters: true range + clock bias + errors."""
    dist = math.dist(ue.position, trp.position)
    e = rng.normal(0.0, noise.sigma_toa)
    value = dist + noise.clock_bias + e
    if not ue.los_flags[trp.id]:
        mean = nlos_excess_mean(noise, _d2(trp.position, ue.position), scenario)
        value += rng.exponential(mean)
    return value


def synthesize_toas(
    deployment: Deployment,
    ue: UeDrop,
    noise: NoiseModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """TOA vector over all TRPs in id order.

    Gaussian and exponential draws are consumed for every TRP regardless of
    its LOS state so the stream layout is independent of the flags.
    """
    pos = np.asarray(deployment.positions(), dtype=float)
    delta = pos - np.asarray(ue.position, dtype=float)
    dists = np.linalg.norm(delta, axis=1)
    d2d = np.linalg.norm(delta[:, :2], axis=1)
    e = rng.normal(0.0, noise.sigma_toa, size=deployment.n_trps)
    means = np.array(
        [nlos_excess_mean(noise, d, deployment.scenario) for d in d2d]
    )
    biases = rng.exponential(means, size=deployment.n_trps)
    nlos = ~np.asarray(ue.los_flags, dtype=bool)
    return dists + noise.clock_bias + e + biases * nlos


def _reference_covariance(sigma: float, m: int) -> np.ndarray:
    # Cov(e_j - e_ref, e_k - e_ref) = sigma^2 (I + 1 1^T)
    return sigma**2 * (np.eye(m) + np.ones((m, m)))


def form_tdoa(toas: Sequence[float], ref_trp: int, noise: NoiseModel) -> MeasurementSet:
    """Difference every TOA against the reference TRP's TOA.

    Any clock bias common to the TOAs cancels exactly. The covariance is
    sigma^2 (I + 1 1^T) from the shared reference noise term.
    """
    toas = np.asarray(toas, dtype=float)
    n = toas.shape[0]
    if n < 4:
        raise UnavailableFixError("a TDOA fix needs at least 4 TRPs")
    if not (0 <= ref_trp < n):
        raise ValueError(f"reference TRP id {ref_trp} out of range 0..{n - 1}")
    others = [i for i in range(n) if i != ref_trp]
    values = toas[others] - toas[ref_trp]
    cov = _reference_covariance(noise.sigma_toa, n - 1)
    return MeasurementSet(
        ref_trp=ref_trp,
        values=values,
        covariance=cov,
        used_trps=tuple(range(n)),
        sigma_toa=noise.sigma_toa,
    )


def nearest_trp(
    deployment: Deployment,
    position: Sequence[float],
    candidates: Sequence[int] | None = None,
) -> int:
    """Id of the TRP closest (3D) to a position; ties break to the lowest id."""
    ids = range(deployment.n_trps) if candidates is None else candidates
    best_id, best_d = -1, math.inf
    for i in ids:
        d = math.dist(deployment.trps[i].position, position)
        if d < best_d:
            best_id, best_d = i, d
    return best_id


def filter_los_only(
    measurements: MeasurementSet,
    ue: UeDrop,
    deployment: Deployment,
) -> MeasurementSet:
    """Drop measurements whose TRP is blocked, re-referencing if needed.

    If the current reference TRP is itself blocked, the surviving LOS TRP
    nearest to the UE becomes the new reference; range differences between
    surviving TRPs are recovered by subtracting their old rows. Fewer than
    4 LOS TRPs make the fix unavailable.
    """
    los_ids = [i for i in measurements.used_trps if ue.los_flags[i]]
    if len(los_ids) < 4:
        raise UnavailableFixError(
            f"only {len(los_ids)} LOS TRPs; at least 4 links are required"
        )
    old_ref = measurements.ref_trp
    if ue.los_flags[old_ref]:
        new_ref = old_ref
    else:
        new_ref = nearest_trp(deployment, ue.position, candidates=los_ids)
    # Value of TRP i relative to the old reference (0 for the reference row).
    old_value = {old_ref: 0.0}
    for k, t in enumerate(measurements.non_ref_trps):
        old_value[t] = float(measurements.values[k])
    values = np.array(
        [old_value[t] - old_value[new_ref] for t in los_ids if t != new_ref], dtype=float
    )
    cov = _reference_covariance(measurements.sigma_toa, len(los_ids) - 1)
    return MeasurementSet(
        ref_trp=new_ref,
        values=values,
        covariance=cov,
        used_trps=tuple(los_ids),
        sigma_toa=measurements.sigma_toa,
    )
