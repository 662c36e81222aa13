"""Square images on [-1, 1]^2 and the geometric/noise perturbations used throughout.

An image is an L x L grid of reals over the domain [-1, 1]^2 with pixel
width h = 2/L and pixel centers at -1 + (i + 0.5) h.  Row index is y,
column index is x.  Images flagged ``probability`` are nonnegative and
their entries sum to one.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import (
    AllZeroError,
    NegativeMassError,
    NonIntegerShiftError,
    ShrinkNotAllowedError,
)

__all__ = [
    "Image",
    "Shift2D",
    "NoiseSpec",
    "pixel_centers",
    "normalize_to_probability",
    "apply_shift",
    "apply_rotation",
    "add_gaussian_noise",
    "split_signed",
    "gaussian_blob",
    "pad_to",
]

# Negatives at or below this fraction of the image maximum are treated as
# transform round-off and may be clamped silently.
CLAMP_REL_TOL = 1e-12

# SNR at or above this value is treated as the zero-noise limit.
SNR_CLEAN_LIMIT = 1e12


def pixel_centers(L):
    """Pixel-center coordinates along one axis: -1 + (i + 0.5) * 2/L."""
    h = 2.0 / L
    return -1.0 + (np.arange(L) + 0.5) * h


@dataclass(frozen=True)
class Image:
    """L x L real grid on [-1, 1]^2, optionally normalized to a probability."""

    data: np.ndarray
    probability: bool = False

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"image data must be square, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("image data contains NaN or Inf")
        object.__setattr__(self, "data", data)
        if self.probability:
            if data.min() < 0.0:
                raise NegativeMassError("probability image has negative entries")
            total = data.sum()
            if abs(total - 1.0) > 1e-12 * max(1.0, abs(total)):
                raise NegativeMassError(
                    f"probability image sums to {total!r}, expected 1"
                )

    @property
    def L(self):
        return self.data.shape[0]

    @property
    def h(self):
        return 2.0 / self.L

    def mass(self):
        return float(self.data.sum())

    def center_of_mass(self):
        """(x, y) center of mass in domain coordinates."""
        c = pixel_centers(self.L)
        total = self.data.sum()
        cx = float((self.data.sum(axis=0) * c).sum() / total)
        cy = float((self.data.sum(axis=1) * c).sum() / total)
        return cx, cy


@dataclass(frozen=True)
class Shift2D:
    """Translation in domain units (fractions of the [-1, 1] extent)."""

    sx: float
    sy: float

    def __post_init__(self):
        if not (np.isfinite(self.sx) and np.isfinite(self.sy)):
            raise ValueError("shift components must be finite")

    @classmethod
    def from_pixels(cls, px, py, L):
        h = 2.0 / L
        return cls(px * h, py * h)

    def pixels(self, L):
        """Shift expressed in pixels of an L-sized grid."""
        return self.sx * L / 2.0, self.sy * L / 2.0

    @property
    def magnitude(self):
        return float(np.hypot(self.sx, self.sy))


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise level (SNR) plus RNG seed."""

    snr: float
    seed: int = 0

    def __post_init__(self):
        if not (self.snr > 0):
            raise ValueError(f"snr must be positive, got {self.snr}")


def normalize_to_probability(img: Image, clamp_all: bool = False) -> Image:
    """Rescale an image to total mass one.

    Small negatives (magnitude <= 1e-12 * max) are clamped to zero; larger
    negatives raise ``NegativeMassError`` unless ``clamp_all`` is set, in
    which case every negative entry is clamped.
    """
    data = img.data
    peak = data.max()
    if peak <= 0.0:
        raise AllZeroError("image has no positive entries")
    low = data.min()
    if low < 0.0:
        if not clamp_all and -low > CLAMP_REL_TOL * peak:
            raise NegativeMassError(
                f"negative mass {low!r} exceeds clamp threshold; "
                "pass clamp_all=True to clamp"
            )
        data = np.maximum(data, 0.0)
    total = data.sum()
    if total <= 0.0:
        raise AllZeroError("image has no mass after clamping")
    return Image(data / total, probability=True)


def apply_shift(img: Image, s: Shift2D, mode: str = "integer") -> Image:
    """Translate image content by ``s`` (content moves toward +s).

    ``integer`` mode relocates samples exactly and zero-fills; content
    pushed past the grid edge is lost.  ``fourier`` mode applies a phase
    ramp in frequency space and wraps periodically, so callers must keep
    a zero margin at least as wide as the shift.
    """
    L = img.L
    px, py = s.pixels(L)
    if mode == "integer":
        ix, iy = round(px), round(py)
        if abs(px - ix) > 1e-9 or abs(py - iy) > 1e-9:
            raise NonIntegerShiftError(
                f"integer mode needs whole-pixel shifts, got ({px}, {py})"
            )
        out = np.zeros_like(img.data)
        src_x = slice(max(0, -ix), min(L, L - ix))
        src_y = slice(max(0, -iy), min(L, L - iy))
        dst_x = slice(max(0, ix), min(L, L + ix))
        dst_y = slice(max(0, iy), min(L, L + iy))
        out[dst_y, dst_x] = img.data[src_y, src_x]
        return Image(out, probability=False)
    if mode == "fourier":
        k = np.fft.fftfreq(L) * L
        ramp_x = np.exp(-2j * np.pi * k * px / L)
        ramp_y = np.exp(-2j * np.pi * k * py / L)
        spec = np.fft.fft2(img.data) * ramp_y[:, None] * ramp_x[None, :]
        return Image(np.fft.ifft2(spec).real, probability=False)
    raise ValueError(f"unknown shift mode {mode!r}")


def _quarter_turn(data, k):
    # rotation by k*pi/2 about the grid center is the exact permutation
    # np.rot90(data, -k) under the row=y, col=x layout
    return np.rot90(data, -int(k) % 4).copy()


def apply_rotation(img: Image, angle: float) -> Image:
    """Rotate image content counterclockwise by ``angle`` radians.

    Bilinear interpolation about the grid center (domain origin); source
    samples outside [-1, 1]^2 read as zero.  Exact multiples of pi/2 take
    the exact permutation path.
    """
    k = angle / (np.pi / 2.0)
    k_round = np.round(k)
    if abs(k - k_round) < 1e-12:
        return Image(_quarter_turn(img.data, k_round), probability=img.probability)
    L = img.L
    c = pixel_centers(L)
    xx, yy = np.meshgrid(c, c)
    ca, sa = np.cos(angle), np.sin(angle)
    # output(u) = input(R^T u)
    src_x = ca * xx + sa * yy
    src_y = -sa * xx + ca * yy
    h = 2.0 / L
    col = (src_x + 1.0) / h - 0.5
    row = (src_y + 1.0) / h - 0.5
    out = ndimage.map_coordinates(
        img.data, [row, col], order=1, mode="grid-constant", cval=0.0
    )
    return Image(out, probability=False)


def add_gaussian_noise(img: Image, spec: NoiseSpec) -> Image:
    """Add white Gaussian noise at the requested SNR.

    SNR is defined as mean(img^2) over the full grid divided by the noise
    variance.  Deterministic for a fixed seed; the result is signed and
    loses the probability flag.
    """
    if spec.snr >= SNR_CLEAN_LIMIT:
        return Image(img.data.copy(), probability=False)
    signal_power = float(np.mean(img.data**2))
    sigma = np.sqrt(signal_power / spec.snr)
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, sigma, size=img.data.shape)
    return Image(img.data + noise, probability=False)


def split_signed(img: Image):
    """Split into nonnegative parts: pos - neg == img exactly."""
    pos = np.maximum(img.data, 0.0)
    neg = np.maximum(-img.data, 0.0)
    return Image(pos, probability=False), Image(neg, probability=False)


def gaussian_blob(L: int, center: Shift2D, sigma: float) -> Image:
    """Probability-normalized isotropic Gaussian sampled at pixel centers."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    c = pixel_centers(L)
    gx = np.exp(-((c - center.sx) ** 2) / (2.0 * sigma**2))
    gy = np.exp(-((c - center.sy) ** 2) / (2.0 * sigma**2))
    data = gy[:, None] * gx[None, :]
    return normalize_to_probability(Image(data))


def pad_to(img: Image, newL: int) -> Image:
    """Zero-pad to ``newL`` with the original block at offset (newL-L)//2."""
    L = img.L
    if newL < L:
        raise ShrinkNotAllowedError(f"cannot pad {L} down to {newL}")
    if newL == L:
        return img
    off = (newL - L) // 2
    out = np.zeros((newL, newL))
    out[off : off + L, off : off + L] = img.data
    return Image(out, probability=img.probability)
