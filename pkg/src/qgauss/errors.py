"""Exception and warning types shared across the package."""


class QGaussError(Exception):
    """Base class for all errors raised by qgauss."""


class InvalidDimensionError(QGaussError, ValueError):
    """Truncation level below the minimum of 2."""


class ShapeError(QGaussError, ValueError):
    """Array has the wrong shape or is not symmetric/Hermitian where required."""


class InadmissibleCovarianceError(QGaussError, ValueError):
    """Covariance matrix violates the complete uncertainty inequality."""


class DomainError(QGaussError, ValueError):
    """Argument lies outside the domain of the operation."""


class AccuracyWarning(UserWarning):
    """Quadrature grid too small for the requested integrand."""


class PrecisionWarning(UserWarning):
    """Finite-difference step so small that cancellation dominates."""


class TailClipWarning(UserWarning):
    """Too many Monte Carlo displacements exceed the truncation's safe range."""
