"""Exception taxonomy shared across the package.

Each error family maps to a distinct CLI exit code (see cli.EXIT_CODES).
Plain OS-level write failures are raised as the builtin OSError.
"""


class SickleSplitError(Exception):
    """Base class for all package errors."""


class DecodeError(SickleSplitError):
    """File could not be decoded as the expected raster format."""


class InvalidLabelError(SickleSplitError):
    """Label map contains a value outside {0..class_count}."""

    def __init__(self, value, row, col, class_count):
        self.value = value
        self.row = row
        self.col = col
        self.class_count = class_count
        super().__init__(
            f"label value {value} at pixel ({row}, {col}) exceeds "
            f"class_count={class_count}"
        )


class EmptySequenceError(SickleSplitError):
    """No frames matched the naming convention in a directory."""


class ChannelCountError(SickleSplitError):
    """Image has the wrong number of channels for the operation."""


class TileTooLargeError(SickleSplitError):
    """CLAHE tile grid does not fit inside the image."""


class InvalidClassError(SickleSplitError):
    """Requested class id is not a foreground class of the label map."""


class MarkerOutsideMaskError(SickleSplitError):
    """A watershed marker does not lie on a foreground pixel."""


class DimensionMismatchError(SickleSplitError):
    """Inputs that must share dimensions do not."""


class PlacementFailureError(SickleSplitError):
    """Synthetic scene generation could not place a cell (canvas too crowded)."""


class SeriesMismatchError(SickleSplitError):
    """Two count series share no frame indices."""


class MissingReferenceError(SickleSplitError):
    """A sweep frame has no reference count."""


class DecoderMissingError(SickleSplitError):
    """External video decoder not found on PATH."""


class InvalidSamplingError(SickleSplitError):
    """Frame sampling parameter N or S is not a positive value."""
