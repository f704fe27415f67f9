"""Exception and warning types."""


class NacError(Exception):
    """Base class for all package errors."""


class ConfigurationError(NacError, ValueError):
    """Invalid generator parameters or an invalid nesting."""


class BoundaryError(NacError, ValueError):
    """Argument on the boundary of (or outside) the open domain."""


class UnsupportedStructureError(NacError):
    """Family pair, nesting depth or structure not covered by the closed forms."""


class DataError(NacError, ValueError):
    """Bad rows in a data matrix."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class DslError(NacError, ValueError):
    """Malformed structure string."""


class PrecisionWarning(UserWarning):
    """Catastrophic cancellation was detected in a floating-point sum."""
