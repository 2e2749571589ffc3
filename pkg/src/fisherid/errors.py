"""Exception types raised across the package."""


class FisherIdError(Exception):
    """Base class for all package errors."""


class InvalidDataError(FisherIdError, ValueError):
    """Input table is malformed or contains non-finite values."""


class DegenerateDataError(FisherIdError, ValueError):
    """Data has no spread left to analyse (zero covariance, all points dropped)."""


class InsufficientDataError(FisherIdError, ValueError):
    """Too few points for the requested computation."""


class DomainError(FisherIdError, ValueError):
    """Argument outside the mathematical domain of a function."""


class FullySeparableError(FisherIdError):
    """Every point is Fisher-separable at every tested alpha."""
