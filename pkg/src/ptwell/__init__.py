"""Spectrum of a particle in a box with a pair of imaginary point interactions."""

__version__ = "0.1.0"

from .continuation import (Branch, ExceptionalPoint, RootCount, complex_continuation,
                           count_roots_rect, detect_ep, real_roots, track_branch)
from .curves import (CriticalSequence, SpectralCurve, atlas_min, critical_coupling,
                     critical_sequence, crossing_points, is_monotone, trace_curve)
from .errors import (ContinuationError, ParameterError, PtwellError, ResourceGuardError,
                     UnboundedCurveError)
from .oracle import eigenfunction, grid_oracle, matching_det
from .partition import LineKind, classify, partition, rational_approx
from .secular import ModelParams, d_secular, secular_complex, secular_real, xi_squared_of_k

__all__ = [
    "__version__", "Branch", "ExceptionalPoint", "RootCount", "complex_continuation",
    "count_roots_rect", "detect_ep", "real_roots", "track_branch", "CriticalSequence",
    "SpectralCurve", "atlas_min", "critical_coupling", "critical_sequence", "crossing_points",
    "is_monotone", "trace_curve", "ContinuationError", "ParameterError", "PtwellError",
    "ResourceGuardError", "UnboundedCurveError", "eigenfunction", "grid_oracle", "matching_det",
    "LineKind", "classify", "partition", "rational_approx", "ModelParams", "d_secular",
    "secular_complex", "secular_real", "xi_squared_of_k",
]
