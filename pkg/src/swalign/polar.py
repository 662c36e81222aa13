"""Discrete Radon transforms via the Fourier slice theorem on a polar grid.

Each image slice at angle theta_k is obtained by sampling the image's
Fourier sum along the ray omega_m * (cos theta_k, sin theta_k) with
omega_m = m * pi for m = -L/2 .. L/2 - 1, then applying a length-L
inverse DFT to land on the spatial grid t_j = -1 + (j + 0.5) * 2/L over
[-1, 1].  The optional ramp filter multiplies the radial samples by
|omega_m| before inversion and splits the signed result.
"""

from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from .errors import EmptySliceError, OddLengthError, TooLargeError
from .image import Image, apply_rotation
from .nufft import NufftConfig, nudft2, nufft2

__all__ = [
    "PolarGrid",
    "Sinogram",
    "SignedSinogram",
    "build_polar_grid",
    "slice_length",
    "nufft_polar_slices",
    "nudft_polar_slices",
    "sinogram_on_grid",
    "sinogram_pair",
    "pair_spatial",
    "pair_spatial_ramp",
    "sinogram",
    "ramp_sinogram",
    "brute_radon",
]

# Column mass at or below this (before normalization) marks an empty slice.
EMPTY_MASS_TOL = 1e-14

NUDFT_MAX_L = 256
BRUTE_RADON_MAX_L = 512


@dataclass(frozen=True)
class PolarGrid:
    """Polar frequency grid: L radial samples by n angles over [0, 2pi)."""

    L: int
    n: int
    angles: np.ndarray  # (n,)
    omegas: np.ndarray  # (L,) = m*pi, m = -L/2 .. L/2-1

    def points(self):
        """Flattened target coordinates, radial index major: shape (L*n,)."""
        xi_x = np.outer(self.omegas, np.cos(self.angles))
        xi_y = np.outer(self.omegas, np.sin(self.angles))
        return xi_x.ravel(), xi_y.ravel()


@dataclass(frozen=True)
class Sinogram:
    """L x n matrix whose columns are discrete projection densities.

    Nonempty columns sum to one; columns flagged in ``empty`` are all-zero
    (possible only for the signed parts of ramp-filtered slices).
    """

    data: np.ndarray
    angles: np.ndarray
    empty: np.ndarray

    @property
    def L(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class SignedSinogram:
    """Positive/negative parts of ramp-filtered slices plus their raw masses."""

    pos: Sinogram
    neg: Sinogram
    pos_mass: np.ndarray
    neg_mass: np.ndarray


_grid_cache: dict = {}


def build_polar_grid(L, n, angles=None):
    """Equispaced polar grid; pass explicit ``angles`` to override the spacing."""
    if L % 2:
        raise OddLengthError(f"slice length must be even, got {L}")
    if n < 1:
        raise ValueError(f"need at least one angle, got {n}")
    if angles is None:
        grid = _grid_cache.get((L, n))
        if grid is None:
            angles = 2.0 * np.pi * np.arange(n) / n
            omegas = np.arange(-L // 2, L // 2) * np.pi
            grid = _grid_cache[(L, n)] = PolarGrid(L, n, angles, omegas)
        return grid
    else:
        angles = np.asarray(angles, dtype=np.float64)
        if angles.shape != (n,):
            raise ValueError("angles must have shape (n,)")
    omegas = np.arange(-L // 2, L // 2) * np.pi
    return PolarGrid(L, n, angles, omegas)


def slice_length(L_img):
    """Slice sample count for an image of side L_img (rounded down to even)."""
    return L_img - (L_img % 2)


def _target_points(grid: PolarGrid, full: bool):
    """Flattened frequency targets, memoized on the grid instance: radial
    range m = 0..M, or the packed-pair range m = -M..M when ``full``."""
    attr = "_full_points" if full else "_half_points"
    pts = getattr(grid, attr, None)
    if pts is None:
        M = grid.L // 2
        omegas = (np.arange(-M, M + 1) if full else np.arange(M + 1)) * np.pi
        xi_x = np.outer(omegas, np.cos(grid.angles)).ravel()
        xi_y = np.outer(omegas, np.sin(grid.angles)).ravel()
        pts = (xi_x, xi_y)
        object.__setattr__(grid, attr, pts)
    return pts


def _half_slices(img: Image, grid: PolarGrid, cfg: NufftConfig):
    """Slice rows for m = 0 .. L/2 only; the rest follow by conjugation."""
    if grid.L > img.L:
        raise ValueError(
            f"slice length {grid.L} exceeds image Nyquist band (L={img.L})"
        )
    M = grid.L // 2
    xi_x, xi_y = _target_points(grid, full=False)
    return nufft2(img.data * img.h**2, xi_x, xi_y, cfg).reshape(M + 1, grid.n)


def nufft_polar_slices(img: Image, grid: PolarGrid, cfg: NufftConfig = NufftConfig()):
    """Central Fourier slices of an image: entry (m, k) ~ sum_p F[p] e^{-i xi.x_p} h^2.

    The image is real, so only the m >= 0 radial half is evaluated; the
    negative half is its complex conjugate.
    """
    half = _half_slices(img, grid, cfg)
    M = grid.L // 2
    out = np.empty((grid.L, grid.n), dtype=np.complex128)
    out[M:, :] = half[:M, :]
    out[0, :] = np.conj(half[M, :])
    out[1:M, :] = np.conj(half[M - 1 : 0 : -1, :])
    return out


def nudft_polar_slices(img: Image, grid: PolarGrid):
    """Exact direct-summation oracle for nufft_polar_slices (O(L^2 * Ln))."""
    if img.L > NUDFT_MAX_L:
        raise TooLargeError(f"nudft guard: L={img.L} > {NUDFT_MAX_L}")
    xi_x, xi_y = grid.points()
    vals = nudft2(img.data * img.h**2, xi_x, xi_y)
    return vals.reshape(grid.L, grid.n)


_coeff_cache: dict = {}


def _half_coeffs(L, ramp):
    """Multipliers turning half slice rows into the irfft half-spectrum.

    Row m of the spectrum is coeff_m * y_m for m < L/2; the Nyquist bin is
    Re(coeff_nyq * conj(y_{L/2})) since it stems from the m = -L/2 sample.
    """
    key = (L, ramp)
    cached = _coeff_cache.get(key)
    if cached is None:
        m = np.arange(L // 2)
        coeff = 0.5 * np.exp(1j * np.pi * m * (1.0 / L - 1.0))
        nyq = 0.5 * np.exp(1j * np.pi * (-(L // 2)) * (1.0 / L - 1.0))
        if ramp:
            coeff = coeff * m * np.pi
            nyq = nyq * (L // 2) * np.pi
        cached = _coeff_cache[key] = (coeff[:, None].copy(), nyq)
    return cached


def _spatial_from_half(half, ramp=False):
    """Real projection values at the L pixel centers of [-1, 1] from the
    m = 0 .. L/2 slice rows (length-L inverse DFT via irfft)."""
    M = half.shape[0] - 1
    L = 2 * M
    coeff, nyq = _half_coeffs(L, ramp)
    H = np.empty_like(half)
    np.multiply(half[:M], coeff, out=H[:M])
    H[0] = H[0].real
    H[M] = (nyq * np.conj(half[M])).real
    return L * sp_fft.irfft(H, n=L, axis=0)


def _normalize_columns(vals, h, require_mass):
    """Clamp negatives, flag/zero empty columns, scale the rest to unit sum."""
    vals = np.maximum(vals, 0.0)
    mass = vals.sum(axis=0) * h
    empty = mass <= EMPTY_MASS_TOL
    if require_mass and empty.any():
        k = int(np.argmax(empty))
        raise EmptySliceError(f"slice {k} has mass {mass[k]!r} before normalization")
    sums = vals.sum(axis=0)
    sums[empty] = 1.0
    out = vals / sums
    out[:, empty] = 0.0
    return out, empty, mass


def sinogram_on_grid(img: Image, grid: PolarGrid, cfg: NufftConfig = NufftConfig()):
    """Radon transform on an explicit polar grid (arbitrary angle set)."""
    if not img.probability:
        raise ValueError("sinogram expects a probability-flagged image")
    vals = _spatial_from_half(_half_slices(img, grid, cfg))
    data, empty, _ = _normalize_columns(vals, 2.0 / grid.L, require_mass=True)
    return Sinogram(data, grid.angles, empty)


def _pair_polar_slices(F: Image, G: Image, grid: PolarGrid, cfg: NufftConfig):
    """Fourier slices of two real images from one transform of F + iG.

    The packed spectrum satisfies F_hat = (C(xi) + conj(C(-xi)))/2 and
    G_hat = (C(xi) - conj(C(-xi)))/(2i), so one complex evaluation on the
    radial range m = -L/2 .. L/2 replaces two real ones.  Returns the
    m = 0 .. L/2 halves; each is exactly conjugate-symmetric.
    """
    L, n = grid.L, grid.n
    M = L // 2
    xi_x, xi_y = _target_points(grid, full=True)
    packed = (F.data + 1j * G.data) * F.h**2
    C = nufft2(packed, xi_x, xi_y, cfg).reshape(L + 1, n)
    up = C[M:, :]  # rows m = 0 .. M
    down = np.conj(C[M::-1, :])  # rows conj(C at -omega_m), m = 0 .. M
    F_half = 0.5 * (up + down)
    G_half = -0.5j * (up - down)
    return F_half, G_half


def _vals_to_sinogram(vals, grid, ramp, require_mass):
    h = 2.0 / grid.L
    if not ramp:
        data, empty, _ = _normalize_columns(vals, h, require_mass=require_mass)
        return Sinogram(data, grid.angles, empty)
    pos, pos_empty, pos_mass = _normalize_columns(
        np.maximum(vals, 0.0), h, require_mass=False
    )
    neg, neg_empty, neg_mass = _normalize_columns(
        np.maximum(-vals, 0.0), h, require_mass=False
    )
    return SignedSinogram(
        Sinogram(pos, grid.angles, pos_empty),
        Sinogram(neg, grid.angles, neg_empty),
        pos_mass,
        neg_mass,
    )


def pair_spatial(F: Image, G: Image, n, cfg: NufftConfig = NufftConfig(),
                 ramp: bool = False):
    """Raw spatial slice values for an image pair from one packed NUFFT.

    Returns (vals_F, vals_G, grid); vals_G is vals_F when the images are
    equal (single-transform shortcut).  The packed evaluation order is
    canonicalized on content so downstream quantities are exactly
    symmetric in the argument order.
    """
    if not (F.probability and G.probability):
        raise ValueError("sinogram expects probability-flagged images")
    if F.L != G.L:
        raise ValueError(f"image sizes differ: {F.L} vs {G.L}")
    grid = build_polar_grid(slice_length(F.L), n)
    order = _pair_order(F.data, G.data)
    if order == 0:
        vals = _spatial_from_half(_half_slices(F, grid, cfg), ramp=ramp)
        return vals, vals, grid
    if order < 0:
        F_half, G_half = _pair_polar_slices(F, G, grid, cfg)
    else:
        G_half, F_half = _pair_polar_slices(G, F, grid, cfg)
    return (
        _spatial_from_half(F_half, ramp=ramp),
        _spatial_from_half(G_half, ramp=ramp),
        grid,
    )


def pair_spatial_ramp(F: Image, G: Image, n, cfg: NufftConfig = NufftConfig()):
    """Ramp-filtered variant of pair_spatial."""
    return pair_spatial(F, G, n, cfg, ramp=True)


def sinogram_pair(F: Image, G: Image, n, cfg: NufftConfig = NufftConfig(),
                  ramp: bool = False):
    """Radon transforms of a same-size image pair sharing one packed NUFFT.

    The packed evaluation is canonicalized on the pair content so results
    are exactly symmetric in the argument order, and identical inputs take
    a single-image path so self-distances vanish exactly.
    """
    if ramp:
        vals_F, vals_G, grid = pair_spatial_ramp(F, G, n, cfg)
    else:
        vals_F, vals_G, grid = pair_spatial(F, G, n, cfg)
    return (
        _vals_to_sinogram(vals_F, grid, ramp, require_mass=not ramp),
        _vals_to_sinogram(vals_G, grid, ramp, require_mass=not ramp),
    )


def _pair_order(a, b):
    """Deterministic content order: 0 if equal, else sign of the first
    differing entry (a before b when negative)."""
    av, bv = a.ravel(), b.ravel()
    neq = av != bv
    idx = np.argmax(neq)
    if not neq[idx]:
        return 0
    return -1 if av[idx] < bv[idx] else 1


def sinogram(img: Image, n, cfg: NufftConfig = NufftConfig()) -> Sinogram:
    """Discrete Radon transform with unit-mass columns.

    Negative ringing from the band-limited inversion is clamped to zero
    before normalization.
    """
    return sinogram_on_grid(img, build_polar_grid(slice_length(img.L), n), cfg)


def ramp_sinogram(img: Image, n, cfg: NufftConfig = NufftConfig()) -> SignedSinogram:
    """Ramp-filtered Radon transform split into normalized signed parts.

    Radial samples are multiplied by |omega| before inversion, which zeroes
    the DC bin, so each filtered slice has (near-)zero sum and the raw
    masses of its two parts agree.  Empty parts are flagged, not fatal.
    """
    if not img.probability:
        raise ValueError("ramp_sinogram expects a probability-flagged image")
    grid = build_polar_grid(slice_length(img.L), n)
    vals = _spatial_from_half(_half_slices(img, grid, cfg), ramp=True)
    return _vals_to_sinogram(vals, grid, ramp=True, require_mass=False)


def brute_radon(img: Image, n) -> Sinogram:
    """Spatial-domain Radon oracle: rotate by -theta_k and sum down columns.

    Columns live on the image's own pixel grid (length L_img), so compare
    with sinogram() only for even image sizes.
    """
    if img.L > BRUTE_RADON_MAX_L:
        raise TooLargeError(f"brute_radon guard: L={img.L} > {BRUTE_RADON_MAX_L}")
    angles = 2.0 * np.pi * np.arange(n) / n
    cols = np.empty((img.L, n))
    for k, theta in enumerate(angles):
        rot = apply_rotation(img, -theta)
        cols[:, k] = rot.data.sum(axis=0)
    data, empty, _ = _normalize_columns(cols, img.h, require_mass=True)
    return Sinogram(data, angles, empty)
