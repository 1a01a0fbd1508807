"""Exception types shared across the package."""


class AreaMetricError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(AreaMetricError, ValueError):
    pass


class BodyParseError(AreaMetricError, ValueError):
    """Malformed body description; the message names the offending field."""


class GridMismatchError(AreaMetricError, ValueError):
    pass


class BoundaryShapeError(AreaMetricError, ValueError):
    """The body has (numerically) zero intrinsic area: a point or a segment."""


class NumericalConsistencyError(AreaMetricError, ArithmeticError):
    """An internal cross-check failed beyond its tolerance."""
