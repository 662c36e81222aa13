"""Discrete CDFs, quantile functions, and the closed-form 1-D W2 distance.

Densities live on L bins over [-1, 1] (bin edges -1 + j*h, h = 2/L) and
are inverted at the quantile levels z_j = j/L.  The inverse follows the
infimum convention: within a bin the piecewise-linear CDF is inverted
exactly, and levels attained on a flat stretch resolve to its left end.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (
    EmptySliceError,
    LengthMismatchError,
    NotNormalizedError,
    NumericalError,
)
from .polar import EMPTY_MASS_TOL, Sinogram

__all__ = [
    "DiscreteCdf",
    "QuantileColumn",
    "QuantileMatrix",
    "pdf_to_cdf",
    "cdf_to_icdf",
    "w2_squared_1d",
    "sinogram_quantiles",
]


@dataclass(frozen=True)
class DiscreteCdf:
    """Cumulative sums of a unit-mass density on the L-bin grid."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", np.ascontiguousarray(self.values, dtype=np.float64)
        )

    @property
    def L(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class QuantileColumn:
    """Inverse CDF sampled at levels z_j = j/L; nondecreasing, in [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", np.ascontiguousarray(self.values, dtype=np.float64)
        )

    @property
    def L(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class QuantileMatrix:
    """One QuantileColumn per projection angle, plus empty-column flags."""

    values: np.ndarray  # (L, n)
    kind: str = "plain"  # plain | pos | neg
    empty: np.ndarray = None

    def __post_init__(self):
        if self.empty is None:
            object.__setattr__(
                self, "empty", np.zeros(self.values.shape[1], dtype=bool)
            )

    @property
    def L(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]


def pdf_to_cdf(density) -> DiscreteCdf:
    """Cumulative sum of a nonnegative unit-mass density vector."""
    density = np.asarray(density, dtype=np.float64)
    if density.min() < 0.0:
        raise NotNormalizedError("density has negative entries")
    total = density.sum()
    if abs(total - 1.0) > 1e-10:
        raise NotNormalizedError(f"density sums to {total!r}, expected 1")
    return DiscreteCdf(np.cumsum(density))


@njit(cache=True, fastmath=False)
def _icdf_merge(cdfs, out):
    """Invert CDF columns at levels z_j = j/L by a two-pointer merge.

    Each column is nondecreasing and ends at ~1.  Within a bin the
    piecewise-linear CDF is inverted exactly; a level attained on a flat
    stretch resolves to its left end, and z=0 anchors at the left edge of
    the first bin with mass.  Returns False if a column fails the
    monotonicity postcondition.
    """
    L, n = cdfs.shape
    h = 2.0 / L
    for k in range(n):
        j = 0
        prev = 0.0
        for lev in range(L):
            z = lev / L
            while j < L - 1 and cdfs[j, k] < z:
                j += 1
            lo = cdfs[j - 1, k] if j > 0 else 0.0
            gap = cdfs[j, k] - lo
            if gap > 0.0:
                frac = (z - lo) / gap
                if frac < 0.0:
                    frac = 0.0
                elif frac > 1.0:
                    frac = 1.0
            else:
                frac = 0.0
            q = -1.0 + (j + frac) * h
            if lev == 0:
                b = 0
                while b < L - 1 and cdfs[b, k] <= 0.0:
                    b += 1
                q = -1.0 + b * h
            elif q < prev - 1e-12:
                return False
            out[lev, k] = q
            prev = q
    return True


def _icdf_matrix(cdfs):
    cdfs = np.ascontiguousarray(cdfs)
    out = np.empty_like(cdfs)
    if not _icdf_merge(cdfs, out):
        raise NumericalError("quantile column is not nondecreasing")
    return out


@njit(cache=True)
def _spatial_to_quantiles(vals, sign, h, mass_tol, q, empty, mass):
    """Fused clamp / cumulative-sum / inverse-CDF pass over slice columns.

    ``vals`` holds raw spatial slice values; ``sign`` selects the positive
    or negative part.  Levels are compared against the unnormalized
    cumulative sums scaled by the column total, which is the same inverse
    as normalizing first.  Empty columns yield zero quantiles and a flag.
    """
    L, n = vals.shape
    cum = np.empty(L)
    ok = True
    for k in range(n):
        total = 0.0
        for j in range(L):
            v = sign * vals[j, k]
            if v > 0.0:
                total += v
            cum[j] = total
        mass[k] = total * h
        if mass[k] <= mass_tol:
            empty[k] = True
            for lev in range(L):
                q[lev, k] = 0.0
            continue
        empty[k] = False
        j = 0
        prev = 0.0
        for lev in range(L):
            t = (lev / L) * total
            while j < L - 1 and cum[j] < t:
                j += 1
            lo = cum[j - 1] if j > 0 else 0.0
            gap = cum[j] - lo
            if gap > 0.0:
                frac = (t - lo) / gap
                if frac < 0.0:
                    frac = 0.0
                elif frac > 1.0:
                    frac = 1.0
            else:
                frac = 0.0
            val = -1.0 + (j + frac) * h
            if lev == 0:
                b = 0
                while b < L - 1 and cum[b] <= 0.0:
                    b += 1
                val = -1.0 + b * h
            elif val < prev - 1e-12:
                ok = False
            q[lev, k] = val
            prev = val
    return ok


def quantiles_from_spatial(vals, sign=1.0, kind="plain", require_mass=False):
    """QuantileMatrix of the sign-selected part of raw spatial slice columns."""
    L, n = vals.shape
    h = 2.0 / L
    q = np.empty_like(vals)
    empty = np.empty(n, dtype=np.bool_)
    mass = np.empty(n)
    if not _spatial_to_quantiles(vals, sign, h, EMPTY_MASS_TOL, q, empty, mass):
        raise NumericalError("quantile column is not nondecreasing")
    if require_mass and empty.any():
        k = int(np.argmax(empty))
        raise EmptySliceError(f"slice {k} has mass {mass[k]!r} before normalization")
    return QuantileMatrix(q, kind=kind, empty=empty)




def cdf_to_icdf(cdf: DiscreteCdf) -> QuantileColumn:
    """Piecewise-linear inverse of one CDF at levels z_j = j/L."""
    return QuantileColumn(_icdf_matrix(cdf.values[:, None])[:, 0])


def w2_squared_1d(u: QuantileColumn, v: QuantileColumn) -> float:
    """Squared 1-D 2-Wasserstein distance: left-Riemann sum (1/L) sum (u-v)^2."""
    if u.L != v.L:
        raise LengthMismatchError(f"length mismatch: {u.L} vs {v.L}")
    d = u.values - v.values
    return float(np.dot(d, d) / u.L)


def sinogram_quantiles(s: Sinogram, kind: str = "plain") -> QuantileMatrix:
    """Per-column inverse CDFs of a sinogram; empty columns stay all-zero."""
    data = s.data
    if s.empty.any():
        live = ~s.empty
        q = np.zeros_like(data)
        if live.any():
            q[:, live] = _icdf_matrix(np.cumsum(data[:, live], axis=0))
    else:
        q = _icdf_matrix(np.cumsum(data, axis=0))
    return QuantileMatrix(q, kind=kind, empty=s.empty.copy())
