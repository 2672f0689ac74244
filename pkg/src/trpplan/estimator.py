"""Position estimation from TDOA sets by damped Gauss-Newton least squares.

The weighted cost (y - h(theta))' R^-1 (y - h(theta)) is minimized with a
Levenberg-style multiplicative damping on the normal equations. By default
only x and y are estimated with the UE height held at its known value;
ceiling-mounted layouts make the full 3D problem nearly rank deficient.
A full-3D mode is available for elevated-radio halls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import MeasurementSet
from .scenario import Deployment

__all__ = ["SolveOptions", "FixResult", "initial_guess", "residual", "solve_tdoa"]


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 50
    step_tolerance_m: float = 1e-6
    solve_3d: bool = False


@dataclass(frozen=True, eq=False)
class FixResult:
    """Solver outcome: the estimate plus convergence diagnostics."""

    estimate: tuple[float, float, float]
    converged: bool
    iterations: int
    residual_norm: float
    gradient_norm: float
    covariance_estimate: np.ndarray | None = None


def _used_positions(measurements: MeasurementSet, deployment: Deployment) -> np.ndarray:
    return np.asarray(
        [deployment.trps[i].position for i in measurements.used_trps], dtype=float
    )


def _predicted(theta: np.ndarray, positions: np.ndarray, ref_row: int) -> np.ndarray:
    dists = np.linalg.norm(positions - theta[None, :], axis=1)
    mask = np.arange(positions.shape[0]) != ref_row
    return dists[mask] - dists[ref_row]


def residual(
    theta: Sequence[float],
    measurements: MeasurementSet,
    deployment: Deployment,
) -> np.ndarray:
    """Measurement minus model, one entry per TDOA row."""
    positions = _used_positions(measurements, deployment)
    ref_row = measurements.used_trps.index(measurements.ref_trp)
    return measurements.values - _predicted(np.asarray(theta, dtype=float), positions, ref_row)


def initial_guess(
    measurements: MeasurementSet,
    deployment: Deployment,
    lattice_spacing: float = 5.0,
) -> tuple[float, float, float]:
    """Coarse lattice search at UE height minimizing the weighted residual.

    Deterministic: the lattice is scanned in ascending (x, y) order and
    only a strictly lower cost replaces the incumbent, so ties resolve to
    the lowest (x, then y) point.
    """
    scenario = deployment.scenario
    positions = _used_positions(measurements, deployment)
    ref_row = measurements.used_trps.index(measurements.ref_trp)
    r_inv = np.linalg.inv(measurements.covariance)
    z = scenario.ue_height
    nx = max(1, int(scenario.x_len // lattice_spacing))
    ny = max(1, int(scenario.y_len // lattice_spacing))
    xs = (np.arange(nx) + 0.5) * lattice_spacing
    ys = (np.arange(ny) + 0.5) * lattice_spacing
    # Lattice flattened with x as the slow axis so the first arg-minimum is
    # the lowest (x, then y) point.
    grid = np.column_stack(
        [
            np.repeat(xs, ny),
            np.tile(ys, nx),
            np.full(nx * ny, z),
        ]
    )
    dists = np.linalg.norm(grid[:, None, :] - positions[None, :, :], axis=2)
    mask = np.arange(positions.shape[0]) != ref_row
    predicted = dists[:, mask] - dists[:, ref_row : ref_row + 1]
    res = measurements.values[None, :] - predicted
    costs = np.einsum("ij,jk,ik->i", res, r_inv, res)
    best = int(np.argmin(costs))
    return (float(grid[best, 0]), float(grid[best, 1]), z)


def solve_tdoa(
    measurements: MeasurementSet,
    deployment: Deployment,
    init: Sequence[float],
    options: SolveOptions | None = None,
) -> FixResult:
    """Minimize the weighted TDOA residual starting from ``init``.

    Damping: lambda starts at 1e-3, multiplied by 10 when a step fails to
    reduce the cost and divided by 10 when it succeeds, so the accepted
    cost sequence is non-increasing. Stops once the accepted step is
    shorter than the tolerance. In 3D mode the height is clamped to
    [0, ceiling].
    """
    if options is None:
        options = SolveOptions()
    scenario = deployment.scenario
    positions = _used_positions(measurements, deployment)
    ref_row = measurements.used_trps.index(measurements.ref_trp)
    r_inv = np.linalg.inv(measurements.covariance)
    n_param = 3 if options.solve_3d else 2

    def jacobian(t: np.ndarray) -> np.ndarray:
        diffs = t[None, :] - positions
        dists = np.linalg.norm(diffs, axis=1)
        dists = np.maximum(dists, 1e-12)
        units = diffs / dists[:, None]
        mask = np.arange(positions.shape[0]) != ref_row
        return units[mask] - units[ref_row]

    def cost_of(t: np.ndarray) -> tuple[float, np.ndarray]:
        r = measurements.values - _predicted(t, positions, ref_row)
        return float(r @ r_inv @ r), r

    def descend(start: np.ndarray) -> tuple[np.ndarray, float, np.ndarray, int, bool]:
        theta = start.copy()
        cost, r = cost_of(theta)
        lam = 1e-3
        converged = False
        iterations = 0
        for iterations in range(1, options.max_iterations + 1):
            H = jacobian(theta)[:, :n_param]
            g = H.T @ r_inv @ r
            A = H.T @ r_inv @ H
            # Marquardt scaling keeps the damping proportionate per axis.
            damp = np.diag(np.maximum(np.diag(A), 1e-12))
            accepted = False
            step_norm = math.inf
            for _ in range(12):
                try:
                    delta = np.linalg.solve(A + lam * damp, g)
                except np.linalg.LinAlgError:
                    lam *= 10.0
                    continue
                candidate = theta.copy()
                candidate[:n_param] += delta
                if options.solve_3d:
                    candidate[2] = min(max(candidate[2], 0.0), scenario.ceiling_height)
                new_cost, new_r = cost_of(candidate)
                if new_cost <= cost:
                    step_norm = float(np.linalg.norm(candidate - theta))
                    theta, cost, r = candidate, new_cost, new_r
                    lam = max(lam / 10.0, 1e-12)
                    accepted = True
                    break
                lam *= 10.0
            if not accepted:
                break
            if step_norm < options.step_tolerance_m:
                converged = True
                break
        return theta, cost, r, iterations, converged

    theta, cost, r, iterations, converged = descend(np.asarray(init, dtype=float))

    # Global safeguard: a descent from a bad init can settle in a side basin
    # of the hyperbolic cost surface. If the coarse lattice scan beats the
    # local result, restart once from the scan point.
    scan = np.asarray(initial_guess(measurements, deployment), dtype=float)
    if cost_of(scan)[0] < cost:
        theta2, cost2, r2, it2, conv2 = descend(scan)
        iterations += it2
        if cost2 < cost:
            theta, cost, r, converged = theta2, cost2, r2, conv2

    H = jacobian(theta)[:, :n_param]
    g = H.T @ r_inv @ r
    grad_norm = float(np.linalg.norm(g))
    # Scale-free stationarity check: the undamped update at the final point
    # must itself be short, otherwise the damping stalled rather than
    # converged.
    if converged:
        try:
            gn_step = np.linalg.solve(H.T @ r_inv @ H, g)
            if np.linalg.norm(gn_step) > 10.0 * options.step_tolerance_m:
                converged = False
        except np.linalg.LinAlgError:
            converged = False

    covariance = None
    A = H.T @ r_inv @ H
    try:
        cov_block = np.linalg.inv(A)
        covariance = np.zeros((3, 3))
        covariance[:n_param, :n_param] = cov_block
    except np.linalg.LinAlgError:
        pass

    return FixResult(
        estimate=(float(theta[0]), float(theta[1]), float(theta[2])),
        converged=converged,
        iterations=iterations,
        residual_norm=math.sqrt(max(cost, 0.0)),
        gradient_norm=grad_norm,
        covariance_estimate=covariance,
    )
