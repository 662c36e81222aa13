"""Exhaustive rotational alignment over the n-angle grid.

Rotating an image by 2*pi*l/n cyclically shifts its sinogram columns by l,
so the squared distance over all grid rotations expands into two
shift-invariant norm terms plus row-wise circular cross-correlations of
the quantile matrices, evaluated with length-n FFTs.  Profile index l
estimates the rotation of the target relative to the reference: if
G = rotate(F, 2*pi*l0/n) the profile minimum sits at l0.
"""

import time
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from .errors import (
    NumericalError,
    SizeMismatchError,
    TooLargeError,
    UnsupportedMetricError,
)
from .image import Image, apply_rotation, normalize_to_probability
from .metrics import (
    MetricKind,
    MetricParams,
    evaluate_metric,
    euclidean_squared,
    plain_quantiles_pair,
    ramp_quantiles_pair,
)
from .nufft import NufftConfig
from .polar import _half_slices, _spatial_from_half, build_polar_grid, slice_length
from .quantiles import QuantileMatrix

__all__ = [
    "RotationProfile",
    "AlignmentResult",
    "rotation_profile_sw2",
    "rotation_profile_rfsw2",
    "rotation_profile_euclidean",
    "align",
    "brute_rotation_profile",
]

BRUTE_MAX_N = 512

# profile entries below this are treated as numerical cancellation noise
NEGATIVE_CLAMP = 1e-9

FAST_METRICS = (
    MetricKind.SW2,
    MetricKind.RFSW2,
    MetricKind.EUCLIDEAN,
    MetricKind.MAXSW2,
)


@dataclass(frozen=True)
class RotationProfile:
    """Squared distances over the rotation grid r_l = 2*pi*l/n."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise NumericalError("rotation profile contains non-finite values")
        if vals.min() < -NEGATIVE_CLAMP:
            raise NumericalError(
                f"rotation profile value {vals.min()!r} below clamp guard"
            )
        object.__setattr__(self, "values", np.maximum(vals, 0.0))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def angles(self):
        return 2.0 * np.pi * np.arange(self.n) / self.n

    @property
    def argmin_index(self):
        return int(np.argmin(self.values))

    @property
    def best_angle(self):
        return 2.0 * np.pi * self.argmin_index / self.n

    @property
    def best_value(self):
        return float(self.values[self.argmin_index])


@dataclass(frozen=True)
class AlignmentResult:
    angle: float  # estimated rotation of target vs reference, in [0, 2pi)
    value: float  # squared distance at the optimum
    metric: MetricKind
    profile: RotationProfile = None
    wall_time_s: float = 0.0


def _row_correlations(A, B):
    """c[l] = sum_k <A[:, k], B[:, k + l]> for all l, via row FFTs."""
    n = A.shape[1]
    fa = sp_fft.rfft(A, axis=1)
    fb = sp_fft.rfft(B, axis=1)
    return sp_fft.irfft(np.conj(fa) * fb, n=n, axis=1).sum(axis=0)


def _shift_profile(U: QuantileMatrix, V: QuantileMatrix):
    """D[l] = sum over live column pairs (k, k+l) of ||u_k - v_{k+l}||^2.

    Columns flagged empty are all-zero and excluded from the norm terms via
    mask correlations; the cross term excludes them automatically.
    """
    n = U.n
    a = (U.values**2).sum(axis=0)  # zero on empty columns already
    b = (V.values**2).sum(axis=0)
    cross = _row_correlations(U.values, V.values)
    if U.empty.any() or V.empty.any():
        eu = (~U.empty).astype(np.float64)
        ev = (~V.empty).astype(np.float64)
        fa = sp_fft.rfft(a * eu)
        fb = sp_fft.rfft(b * ev)
        feu = sp_fft.rfft(eu)
        fev = sp_fft.rfft(ev)
        t1 = sp_fft.irfft(np.conj(fa) * fev, n=n)
        t2 = sp_fft.irfft(np.conj(feu) * fb, n=n)
        return t1 + t2 - 2.0 * cross
    return a.sum() + b.sum() - 2.0 * cross


def rotation_profile_sw2(F: Image, G: Image, n=None, cfg=NufftConfig()):
    """Sliced-W2 squared distance at every grid rotation of the target."""
    if F.L != G.L:
        raise SizeMismatchError(f"image sizes differ: {F.L} vs {G.L}")
    n = n or F.L
    U, V = plain_quantiles_pair(F, G, n, cfg)
    return RotationProfile(_shift_profile(U, V) / (n * U.L))


def rotation_profile_rfsw2(F: Image, G: Image, n=None, cfg=NufftConfig()):
    """Ramp-filtered sliced-W2 squared distance at every grid rotation."""
    if F.L != G.L:
        raise SizeMismatchError(f"image sizes differ: {F.L} vs {G.L}")
    n = n or F.L
    Up, Un, Vp, Vn = ramp_quantiles_pair(F, G, n, cfg)
    prof = _shift_profile(Up, Vp) + _shift_profile(Un, Vn)
    return RotationProfile(prof / (n * Up.L))


def rotation_profile_euclidean(F: Image, G: Image, n=None, variant="exact"):
    """Euclidean rotation baseline.

    ``exact`` rotates the target explicitly at every grid angle (O(n L^2),
    used for accuracy studies).  ``sino`` cross-correlates the raw
    (unnormalized) sinogram rows, a Radon-domain proxy with the fast-path
    O(L^2 log L) cost, used only for timing comparisons.
    """
    if F.L != G.L:
        raise SizeMismatchError(f"image sizes differ: {F.L} vs {G.L}")
    n = n or F.L
    if variant == "exact":
        vals = np.empty(n)
        for l in range(n):
            rot = apply_rotation(G, -2.0 * np.pi * l / n)
            vals[l] = euclidean_squared(F, rot)
        return RotationProfile(vals)
    if variant == "sino":
        grid = build_polar_grid(slice_length(F.L), n)
        cfg = NufftConfig()
        SU = _spatial_from_half(_half_slices(F, grid, cfg))
        SV = _spatial_from_half(_half_slices(G, grid, cfg))
        a = (SU**2).sum()
        b = (SV**2).sum()
        prof = a + b - 2.0 * _row_correlations(SU, SV)
        return RotationProfile(prof)
    raise ValueError(f"unknown euclidean variant {variant!r}")


def _max_sw2_profile(F, G, n, cfg):
    # direct column-shift evaluation; the max breaks the FFT trick (O(L^3))
    U, V = plain_quantiles_pair(F, G, n, cfg)
    vals = np.empty(n)
    for l in range(n):
        d = U.values - np.roll(V.values, -l, axis=1)
        vals[l] = (d * d).sum(axis=0).max() / U.L
    return RotationProfile(vals)


def align(F: Image, G: Image, metric: MetricKind, n=None, cfg=NufftConfig()):
    """Grid-resolution rotational alignment under a fast-path metric.

    Returns the estimated rotation of ``G`` relative to ``F`` (ties break
    to the smallest grid index).  Metrics without a fast rotation path
    (Sinkhorn, exact W2) are only available via brute_rotation_profile.
    """
    if metric not in FAST_METRICS:
        raise UnsupportedMetricError(
            f"{metric.value} has no fast rotation search; use brute_rotation_profile"
        )
    n = n or F.L
    start = time.perf_counter()
    if metric is MetricKind.SW2:
        prof = rotation_profile_sw2(F, G, n, cfg)
    elif metric is MetricKind.RFSW2:
        prof = rotation_profile_rfsw2(F, G, n, cfg)
    elif metric is MetricKind.EUCLIDEAN:
        prof = rotation_profile_euclidean(F, G, n, variant="exact")
    else:
        prof = _max_sw2_profile(F, G, n, cfg)
    elapsed = time.perf_counter() - start
    return AlignmentResult(
        angle=prof.best_angle,
        value=prof.best_value,
        metric=metric,
        profile=prof,
        wall_time_s=elapsed,
    )


def brute_rotation_profile(
    F: Image, G: Image, metric: MetricKind, n=None, params: MetricParams = None
):
    """Oracle profile: explicit column shifts (sliced metrics) or explicit
    image rotations (all others) at every grid angle."""
    n = n or F.L
    if n > BRUTE_MAX_N:
        raise TooLargeError(f"brute profile guard: n={n} > {BRUTE_MAX_N}")
    params = params or MetricParams()
    cfg = params.cfg
    if metric in (MetricKind.SW2, MetricKind.RFSW2, MetricKind.MAXSW2):
        if metric is MetricKind.RFSW2:
            Up, Un, Vp, Vn = ramp_quantiles_pair(F, G, n, cfg)
            pairs = [(Up, Vp), (Un, Vn)]
        else:
            pairs = [plain_quantiles_pair(F, G, n, cfg)]
        vals = np.zeros(n)
        for l in range(n):
            acc = 0.0
            for U, V in pairs:
                vv = np.roll(V.values, -l, axis=1)
                ee = np.roll(V.empty, -l)
                d = U.values - vv
                d[:, U.empty | ee] = 0.0
                col_sq = (d * d).sum(axis=0)
                if metric is MetricKind.MAXSW2:
                    acc = max(acc, col_sq.max() / U.L)
                else:
                    acc += col_sq.sum() / (n * U.L)
            vals[l] = acc
        return RotationProfile(vals)
    vals = np.empty(n)
    for l in range(n):
        rot = apply_rotation(G, -2.0 * np.pi * l / n)
        if metric is not MetricKind.EUCLIDEAN:
            rot = normalize_to_probability(rot, clamp_all=True)
        vals[l] = evaluate_metric(metric, F, rot, params)
    return RotationProfile(vals)
