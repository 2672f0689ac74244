"""Information matrices, RMSE lower bounds and geometric dilution of precision.

For range-difference measurements with Gaussian noise the information
matrix is H' R^-1 H, where row j of H is the difference of unit vectors
from the UE towards TRP j and the reference TRP. Inverting it bounds the
covariance of any unbiased position estimator; the square root of the
relevant traces bounds the RMSE. GDOP is the same horizontal bound
evaluated at unit TOA variance, so that sigma * gdop equals the horizontal
bound exactly for any sigma.

The horizontal bound treats the UE height as known (x, y block of the
information matrix), matching the solver, which estimates x and y at a
fixed height. The 3D bound inverts the full matrix and is unbounded for
height-uninformative geometries such as TRPs coplanar with the UE.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channel import NoiseModel, nearest_trp
from .scenario import Deployment, ScenarioSpec

__all__ = [
    "FimResult",
    "BoundGrid",
    "SingularGeometryError",
    "tdoa_jacobian",
    "fim",
    "crlb_rmse_3d",
    "crlb_rmse_2d",
    "gdop_2d",
    "unit_variance_covariance",
    "bound_grid",
    "grid_to_csv",
    "grid_to_dict",
]


class SingularGeometryError(ValueError):
    """UE coincides with a TRP or the covariance is singular."""


@dataclass(frozen=True, eq=False)
class FimResult:
    """Information matrix (3x3, 1/m^2) and the Jacobian it was built from."""

    matrix: np.ndarray
    jacobian: np.ndarray


def tdoa_jacobian(
    theta: Sequence[float],
    deployment: Deployment,
    ref_trp: int,
    used_trps: Sequence[int] | None = None,
) -> np.ndarray:
    """Gradient of the range-difference model at theta, one row per non-reference TRP.

    Row j equals u_j - u_ref with u_i the unit vector from TRP i towards
    theta. Depends only on coordinate differences, hence is translation
    invariant.
    """
    theta = np.asarray(theta, dtype=float)
    ids = list(range(deployment.n_trps)) if used_trps is None else [int(i) for i in used_trps]
    pos = np.asarray([deployment.trps[i].position for i in ids], dtype=float)
    diffs = theta[None, :] - pos
    dists = np.linalg.norm(diffs, axis=1)
    if np.any(dists < 1e-12):
        bad = ids[int(np.argmin(dists))]
        raise SingularGeometryError(f"UE position coincides with TRP {bad}")
    units = diffs / dists[:, None]
    ref_row = ids.index(ref_trp)
    mask = np.arange(len(ids)) != ref_row
    return units[mask] - units[ref_row]


def fim(
    theta: Sequence[float],
    deployment: Deployment,
    ref_trp: int,
    covariance: np.ndarray,
    used_trps: Sequence[int] | None = None,
) -> FimResult:
    """Information matrix H' R^-1 H for a TDOA set at position theta."""
    H = tdoa_jacobian(theta, deployment, ref_trp, used_trps=used_trps)
    R = np.asarray(covariance, dtype=float)
    if R.shape != (H.shape[0], H.shape[0]):
        raise ValueError("covariance dimension must match the number of TDOA rows")
    try:
        rinv_h = np.linalg.solve(R, H)
    except np.linalg.LinAlgError as exc:
        raise SingularGeometryError("singular measurement covariance") from exc
    matrix = H.T @ rinv_h
    matrix = 0.5 * (matrix + matrix.T)
    return FimResult(matrix=matrix, jacobian=H)


def _inverse_if_regular(matrix: np.ndarray) -> np.ndarray | None:
    # Cholesky doubles as the positive-definiteness test.
    try:
        chol = np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return None
    inv_chol = np.linalg.inv(chol)
    return inv_chol.T @ inv_chol


def crlb_rmse_3d(result: FimResult) -> float:
    """Lower bound on 3D position RMSE; inf when the geometry leaves a blind axis."""
    inv = _inverse_if_regular(result.matrix)
    if inv is None:
        return math.inf
    return math.sqrt(np.trace(inv))


def crlb_rmse_2d(result: FimResult) -> float:
    """Lower bound on horizontal RMSE with the UE height known."""
    inv = _inverse_if_regular(result.matrix[:2, :2])
    if inv is None:
        return math.inf
    return math.sqrt(inv[0, 0] + inv[1, 1])


def unit_variance_covariance(m: int) -> np.ndarray:
    """TDOA covariance for unit TOA variance: I + 1 1^T."""
    return np.eye(m) + np.ones((m, m))


def gdop_2d(theta: Sequence[float], deployment: Deployment, ref_trp: int) -> float:
    """Horizontal dilution of precision: position error per meter of TOA error.

    Defined through the unit-variance TDOA covariance so that
    sigma * gdop_2d reproduces the horizontal RMSE bound at TOA std sigma.
    """
    m = deployment.n_trps - 1
    result = fim(theta, deployment, ref_trp, unit_variance_covariance(m))
    return crlb_rmse_2d(result)


@dataclass(frozen=True, eq=False)
class BoundGrid:
    """Per-cell bound values over a regular floor-plan grid.

    Arrays are indexed [iy, ix]; the cell center of (ix, iy) is at
    ((ix + 0.5) * cell_size, (iy + 0.5) * cell_size). Cells with degenerate
    geometry hold inf and are flagged in ``singular``.
    """

    origin: tuple[float, float]
    cell_size: float
    nx: int
    ny: int
    evaluation_height: float
    gdop_2d: np.ndarray
    crlb_rmse_2d: np.ndarray
    crlb_rmse_3d: np.ndarray
    singular: np.ndarray

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin[0] + (ix + 0.5) * self.cell_size,
            self.origin[1] + (iy + 0.5) * self.cell_size,
        )


def bound_grid(
    scenario: ScenarioSpec,
    deployment: Deployment,
    cell_size: float = 1.0,
    noise: NoiseModel | None = None,
    ref_policy: Callable[[Deployment, Sequence[float]], int] | None = None,
) -> BoundGrid:
    """Evaluate GDOP and RMSE bounds at every cell center at UE height.

    The reference TRP per cell defaults to the nearest TRP (lowest id on
    ties). A cell is marked singular instead of failing when its geometry
    is degenerate.
    """
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    if noise is None:
        noise = NoiseModel()
    if ref_policy is None:
        ref_policy = nearest_trp
    nx = math.ceil(scenario.x_len / cell_size)
    ny = math.ceil(scenario.y_len / cell_size)
    z = scenario.ue_height
    m = deployment.n_trps - 1
    r_unit = unit_variance_covariance(m)
    gdop = np.full((ny, nx), math.inf)
    rmse2 = np.full((ny, nx), math.inf)
    rmse3 = np.full((ny, nx), math.inf)
    singular = np.zeros((ny, nx), dtype=bool)
    for iy in range(ny):
        y = (iy + 0.5) * cell_size
        for ix in range(nx):
            x = (ix + 0.5) * cell_size
            theta = (x, y, z)
            ref = ref_policy(deployment, theta)
            try:
                result = fim(theta, deployment, ref, r_unit)
            except SingularGeometryError:
                singular[iy, ix] = True
                continue
            g = crlb_rmse_2d(result)
            gdop[iy, ix] = g
            rmse2[iy, ix] = noise.sigma_toa * g
            # FIM scales as 1/sigma^2, so the 3D bound is sigma times the
            # unit-variance value.
            rmse3[iy, ix] = noise.sigma_toa * crlb_rmse_3d(result)
            if not math.isfinite(g):
                singular[iy, ix] = True
    return BoundGrid(
        origin=(0.0, 0.0),
        cell_size=cell_size,
        nx=nx,
        ny=ny,
        evaluation_height=z,
        gdop_2d=gdop,
        crlb_rmse_2d=rmse2,
        crlb_rmse_3d=rmse3,
        singular=singular,
    )


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def grid_to_csv(grid: BoundGrid) -> str:
    """CSV rows per cell: x_m, y_m, gdop_2d, crlb_rmse_2d_m, crlb_rmse_3d_m, singular_flag.

    Singular cells leave the value columns empty rather than writing inf.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x_m", "y_m", "gdop_2d", "crlb_rmse_2d_m", "crlb_rmse_3d_m", "singular_flag"])
    for iy in range(grid.ny):
        for ix in range(grid.nx):
            x, y = grid.cell_center(ix, iy)
            if grid.singular[iy, ix]:
                writer.writerow([_fmt(x), _fmt(y), "", "", "", 1])
            else:
                g3 = grid.crlb_rmse_3d[iy, ix]
                writer.writerow(
                    [
                        _fmt(x),
                        _fmt(y),
                        _fmt(grid.gdop_2d[iy, ix]),
                        _fmt(grid.crlb_rmse_2d[iy, ix]),
                        _fmt(g3) if math.isfinite(g3) else "",
                        0,
                    ]
                )
    return buf.getvalue()


def _cell_json(value: float):
    return value if math.isfinite(value) else {"singular": True}


def grid_to_dict(grid: BoundGrid) -> dict:
    """JSON-ready grid with row-major arrays; non-finite cells become markers."""
    return {
        "origin": [grid.origin[0], grid.origin[1]],
        "cell_size_m": grid.cell_size,
        "nx": grid.nx,
        "ny": grid.ny,
        "evaluation_height_m": grid.evaluation_height,
        "gdop_2d": [[_cell_json(v) for v in row] for row in grid.gdop_2d.tolist()],
        "crlb_rmse_2d_m": [[_cell_json(v) for v in row] for row in grid.crlb_rmse_2d.tolist()],
        "crlb_rmse_3d_m": [[_cell_json(v) for v in row] for row in grid.crlb_rmse_3d.tolist()],
    }
