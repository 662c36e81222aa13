"""Fast rotational alignment of 2-D images with sliced Wasserstein metrics."""

__version__ = "0.1.0"

from .align import (
    AlignmentResult,
    RotationProfile,
    align,
    brute_rotation_profile,
    rotation_profile_euclidean,
    rotation_profile_rfsw2,
    rotation_profile_sw2,
)
from .image import (
    Image,
    NoiseSpec,
    Shift2D,
    add_gaussian_noise,
    apply_rotation,
    apply_shift,
    gaussian_blob,
    normalize_to_probability,
    pad_to,
    split_signed,
)
from .metrics import (
    MetricKind,
    MetricParams,
    euclidean_squared,
    exact_w2_squared_lp,
    max_sw2_squared,
    mc_sw2_squared,
    rfsw2_squared,
    sinkhorn_squared,
    sw2_squared,
)
from .nufft import NufftConfig
from .polar import (
    PolarGrid,
    SignedSinogram,
    Sinogram,
    brute_radon,
    build_polar_grid,
    nudft_polar_slices,
    nufft_polar_slices,
    ramp_sinogram,
    sinogram,
)
from .quantiles import (
    DiscreteCdf,
    QuantileColumn,
    QuantileMatrix,
    cdf_to_icdf,
    pdf_to_cdf,
    sinogram_quantiles,
    w2_squared_1d,
)
from .tomo import ViewingDirection, Volume, project, viewing_sweep
