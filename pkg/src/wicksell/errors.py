"""Exception types shared across the package."""


class WicksellError(Exception):
    """Base class for package errors."""


class ParameterError(WicksellError, ValueError):
    """A distribution or configuration parameter is outside its domain."""


class DataError(WicksellError, ValueError):
    """Input measurements are missing, malformed, or inconsistent."""


class NumericalError(WicksellError, ArithmeticError):
    """A quadrature or root-finding routine failed to converge."""
