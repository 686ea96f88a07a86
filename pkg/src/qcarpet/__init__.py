"""qcarpet: fractal quantum carpets and their box-counting dimensions.

Builds truncated Weierstrass-like superpositions of Schrodinger eigenstates
(infinite well, harmonic oscillator, power-law potentials, free Gaussian
packet), samples the probability density P(x, t) = |Psi|^2, and estimates
the fractal dimensions of its space cuts, time cuts, velocity graph and
space-time surface.
"""

from .errors import (
    ConvergenceError,
    CutoffError,
    DomainError,
    NoScalingBandError,
    NumericalError,
    NyquistError,
    QcarpetError,
    ResolutionError,
    ValidationError,
    WindowTooSmallError,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "CutoffError",
    "DomainError",
    "NoScalingBandError",
    "NumericalError",
    "NyquistError",
    "QcarpetError",
    "ResolutionError",
    "ValidationError",
    "WindowTooSmallError",
    "__version__",
]
