"""Exception types raised across the package."""


class SwalignError(Exception):
    """Base class for all swalign errors."""


class AllZeroError(SwalignError):
    """Image or slice carries no positive mass."""


class NegativeMassError(SwalignError):
    """Significant negative entries where a probability image was expected."""


class NonIntegerShiftError(SwalignError):
    """Integer shift mode called with a fractional pixel shift."""


class ShrinkNotAllowedError(SwalignError):
    """pad_to called with a target size smaller than the input."""


class OddLengthError(SwalignError):
    """Polar grid slice length must be even."""


class TooLargeError(SwalignError):
    """Input exceeds the size guard of a brute-force code path."""


class EmptySliceError(SwalignError):
    """A projection slice has no mass before normalization."""


class NotNormalizedError(SwalignError):
    """Density vector does not sum to one."""


class LengthMismatchError(SwalignError):
    """1-D operands have different lengths."""


class SizeMismatchError(SwalignError):
    """Images or matrices have incompatible shapes."""


class UnsupportedMetricError(SwalignError):
    """Metric has no fast rotation-search path."""


class InfeasibleError(SwalignError):
    """Transport problem marginals do not balance."""


class EmptySetError(SwalignError):
    """Dataset filter produced no images."""


class BadMagicError(SwalignError):
    """File does not start with the expected magic bytes."""


class DimMismatchError(SwalignError):
    """File header dimensions disagree with the payload."""


class CountMismatchError(SwalignError):
    """Image and label files disagree on the record count."""


class NumericalError(SwalignError):
    """A numeric routine failed to produce a finite result."""
