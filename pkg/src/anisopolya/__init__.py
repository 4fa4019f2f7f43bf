"""Exact monotone rearrangement of piecewise-affine functions, anisotropic
rearrangement inequalities with equality diagnostics, and a Rayleigh-quotient
minimizer over sign-changing weights."""

from .errors import (BandBoundaryError, DomainError, InfeasibleError,
                     PreconditionError, VerificationFailure,
                     WrongOrientationError)
from .pwa import (AnisotropicNorm, PiecewiseAffine, SegmentSlope,
                  WeightFunction, anisotropic_energy, derivative_segments,
                  evaluate, is_monotone, p_derivative_norm,
                  weighted_p_integral)

__version__ = "0.1.0"

__all__ = [
    "AnisotropicNorm", "PiecewiseAffine", "SegmentSlope", "WeightFunction",
    "anisotropic_energy", "derivative_segments", "evaluate", "is_monotone",
    "p_derivative_norm", "weighted_p_integral",
    "DomainError", "PreconditionError", "WrongOrientationError",
    "BandBoundaryError", "VerificationFailure", "InfeasibleError",
    "__version__",
]
