"""Synthetic 3-D densities on the unit ball and their orthographic projections.

Volumes are either analytic isotropic Gaussian mixtures (projections in
closed form) or sampled M^3 grids over [-1, 1]^3 (projections by trilinear
ray sampling).  The viewing sweep measures how rotation-minimized image
distances grow as the viewing direction tilts away from a reference.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .align import (
    rotation_profile_euclidean,
    rotation_profile_rfsw2,
    rotation_profile_sw2,
)
from .image import Image, normalize_to_probability, pixel_centers
from .nufft import NufftConfig

__all__ = ["Volume", "ViewingDirection", "project", "viewing_sweep"]

_WORLD_AXES = np.eye(3)


@dataclass(frozen=True)
class Volume:
    """Unit-mass 3-D density supported on the unit ball."""

    centers: np.ndarray = None  # (k, 3) mixture centers
    weights: np.ndarray = None  # (k,)
    sigmas: np.ndarray = None  # (k,)
    grid: np.ndarray = None  # (M, M, M) voxel masses

    @classmethod
    def mixture(cls, centers, weights, sigmas):
        centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
        weights = np.asarray(weights, dtype=np.float64)
        sigmas = np.asarray(sigmas, dtype=np.float64)
        if abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError(f"mixture weights sum to {weights.sum()!r}")
        if np.any(sigmas <= 0):
            raise ValueError("mixture sigmas must be positive")
        radii = np.linalg.norm(centers, axis=1)
        if np.any(radii >= 1.0):
            raise ValueError("mixture centers must lie inside the unit ball")
        if np.any(radii + 3.0 * sigmas > 1.0):
            warnings.warn("mixture tails extend past the unit ball", stacklevel=2)
        return cls(centers=centers, weights=weights, sigmas=sigmas)

    @classmethod
    def from_grid(cls, grid):
        grid = np.ascontiguousarray(grid, dtype=np.float64)
        if grid.ndim != 3 or len(set(grid.shape)) != 1:
            raise ValueError(f"grid volume must be cubic, got {grid.shape}")
        M = grid.shape[0]
        c = pixel_centers(M)
        xx, yy, zz = np.meshgrid(c, c, c, indexing="ij")
        outside = xx**2 + yy**2 + zz**2 > 1.0
        if np.any(grid[outside] != 0.0):
            warnings.warn(
                "grid volume has mass outside the unit ball; clamping to 0",
                stacklevel=2,
            )
            grid = np.where(outside, 0.0, grid)
        total = grid.sum()
        if total <= 0:
            raise ValueError("grid volume has no mass")
        if abs(total - 1.0) > 1e-9:
            grid = grid / total
        return cls(grid=grid)

    @property
    def is_mixture(self):
        return self.centers is not None


@dataclass(frozen=True)
class ViewingDirection:
    """Unit 3-vector along which the volume is orthographically projected."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        norm = np.linalg.norm(a)
        if norm == 0:
            raise ValueError("viewing direction must be nonzero")
        if abs(norm - 1.0) > 1e-12:
            a = a / norm
        object.__setattr__(self, "a", a)

    @classmethod
    def from_tilt(cls, theta, axis="x"):
        """Reference +z direction tilted by ``theta`` about a world axis."""
        c, s = np.cos(theta), np.sin(theta)
        if axis == "x":
            return cls(np.array([0.0, s, c]))
        if axis == "y":
            return cls(np.array([s, 0.0, c]))
        raise ValueError(f"tilt axis must be 'x' or 'y', got {axis!r}")


def _in_plane_frame(a):
    """Deterministic orthonormal in-plane axes: Gram-Schmidt of ``a`` against
    the first world axis that is not nearly parallel to it."""
    for axis in _WORLD_AXES:
        if abs(axis @ a) < 0.9:
            e1 = axis - (axis @ a) * a
            e1 /= np.linalg.norm(e1)
            return e1, np.cross(a, e1)
    raise RuntimeError("unreachable: no world axis fallback found")


def project(vol: Volume, direction: ViewingDirection, L: int, frame=None) -> Image:
    """Orthographic projection onto the plane orthogonal to ``direction``.

    Analytic mixtures project in closed form (a 3-D isotropic Gaussian
    integrates to a 2-D isotropic Gaussian with the same sigma); grid
    volumes are integrated by trilinear sampling along rays with step h/2.
    The result is probability-normalized.
    """
    if L % 2:
        raise ValueError(f"projection size must be even, got {L}")
    a = direction.a
    e1, e2 = frame if frame is not None else _in_plane_frame(a)
    c = pixel_centers(L)
    if vol.is_mixture:
        u = vol.centers @ e1
        v = vol.centers @ e2
        data = np.zeros((L, L))
        for w, cu, cv, s in zip(vol.weights, u, v, vol.sigmas):
            gx = np.exp(-((c - cu) ** 2) / (2.0 * s * s))
            gy = np.exp(-((c - cv) ** 2) / (2.0 * s * s))
            data += (w / (2.0 * np.pi * s * s)) * gy[:, None] * gx[None, :]
        return normalize_to_probability(Image(data))

    M = vol.grid.shape[0]
    hv = 2.0 / M
    step = 2.0 / L / 2.0
    ts = np.arange(-1.0, 1.0 + step / 2.0, step)
    xx, yy = np.meshgrid(c, c)
    data = np.zeros((L, L))
    # voxel masses -> density values for the line integral
    density = vol.grid / hv**3
    for t in ts:
        pts = xx[..., None] * e1 + yy[..., None] * e2 + t * a
        idx = (pts + 1.0) / hv - 0.5
        data += ndimage.map_coordinates(
            density, [idx[..., 0], idx[..., 1], idx[..., 2]],
            order=1, mode="grid-constant", cval=0.0,
        )
    data *= step
    return normalize_to_probability(Image(data), clamp_all=True)


def viewing_sweep(
    vol: Volume,
    axis: str,
    theta_max: float,
    steps: int,
    L: int,
    metrics=("sw2", "rfsw2", "euclidean"),
    n=None,
    cfg=NufftConfig(),
):
    """Rotation-minimized distances between the reference projection and
    projections at increasing out-of-plane tilt.

    Returns a list of dict rows (theta_deg, metric, value_sqrt).
    """
    if theta_max > np.pi / 2.0:
        raise ValueError("theta_max must be at most pi/2")
    if steps < 2:
        raise ValueError("need at least two sweep steps")
    n = n or L
    ref = project(vol, ViewingDirection.from_tilt(0.0, axis), L)
    rows = []
    for theta in np.linspace(0.0, theta_max, steps):
        proj = project(vol, ViewingDirection.from_tilt(theta, axis), L)
        for metric in metrics:
            if metric == "sw2":
                prof = rotation_profile_sw2(ref, proj, n, cfg)
            elif metric == "rfsw2":
                prof = rotation_profile_rfsw2(ref, proj, n, cfg)
            elif metric == "euclidean":
                prof = rotation_profile_euclidean(ref, proj, n)
            else:
                raise ValueError(f"unsupported sweep metric {metric!r}")
            rows.append(
                {
                    "theta_deg": float(np.degrees(theta)),
                    "metric": metric,
                    "value_sqrt": float(np.sqrt(prof.best_value)),
                }
            )
    return rows
