"""Exception hierarchy shared by all qcarpet modules.

The CLI maps these to exit codes: ValidationError -> 1, NumericalError -> 2,
OSError -> 3.
"""


class QcarpetError(Exception):
    """Base class for all qcarpet errors."""


class ValidationError(QcarpetError, ValueError):
    """Invalid parameters or inputs (a model constraint was violated)."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class ResolutionError(ValidationError):
    """Requested scale is finer than the sampling resolution supports."""


class NyquistError(ValidationError):
    """Sampling rate too low for the frequencies present in the signal."""


class CutoffError(ValidationError):
    """Series cutoff too small for the requested tail bound."""


class NumericalError(QcarpetError):
    """Numerical failure: non-convergence or no usable scaling regime."""


class ConvergenceError(NumericalError):
    """An iterative solver failed to converge within its budget."""


class WindowTooSmallError(NumericalError):
    """A quadrature norm did not converge on the given window."""


class NoScalingBandError(NumericalError):
    """No contiguous scale band reached the required fit quality."""
