"""Exception hierarchy shared by all ptwell modules."""


class PtwellError(Exception):
    """Base class for errors raised by ptwell."""

    exit_code = 3


class ParameterError(PtwellError, ValueError):
    """Invalid input parameters (outside the model domain)."""

    exit_code = 2


class ResourceGuardError(PtwellError):
    """A requested range would exceed a configured size cap."""

    exit_code = 4


class ConsistencyError(PtwellError):
    """An internal cross-check failed (e.g. negative xi^2 inside an interval)."""


class UnboundedCurveError(PtwellError, ValueError):
    """A maximum was requested for a curve that diverges at one end."""


class ContinuationError(PtwellError):
    """Predictor-corrector or Newton iteration diverged.

    ``last_xi`` and ``last_u`` hold the last converged point, if any.
    """

    def __init__(self, message, last_xi=None, last_u=None):
        super().__init__(message)
        self.last_xi = last_xi
        self.last_u = last_u


class BoundaryRootError(PtwellError):
    """A root stayed on the counting contour after all dilations."""


class EigenfunctionError(PtwellError):
    """The null space of the matching matrix is not one-dimensional."""


class FeatureUnavailable(PtwellError):
    """An optional capability (dense non-Hermitian eigensolver) is not built."""
