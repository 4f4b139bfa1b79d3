"""Exception types shared across the package."""


class StochOrderError(Exception):
    """Base class for every error raised by stochorder."""


class DimensionError(StochOrderError):
    """Objects live on different grids or have mismatched lengths."""


class PreconditionError(StochOrderError):
    pass


class ValidationError(StochOrderError):
    """Malformed input document or out-of-range field."""


class NumericalFailure(StochOrderError):
    """The LP engine could not finish (cycling, singular basis, iteration cap)."""


class SizeError(StochOrderError):
    pass


class UnsupportedError(StochOrderError):
    """Requested cone/dimension combination has no exact routine."""


class NotExposable(StochOrderError):
    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class InapplicableError(StochOrderError):
    pass


class InvariantViolation(StochOrderError):
    """Two independent characterizations disagreed. Always a bug signal."""


class BoundaryError(StochOrderError):
    """Belief input touches the simplex boundary where ratio maps are undefined."""
