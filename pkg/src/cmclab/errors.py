"""Exception taxonomy shared across the package."""

from .fields import BoundaryStencilError  # re-export, raised by grid stencils

__all__ = [
    "BoundaryStencilError",
    "CapabilityError",
    "CmcLabError",
    "ConfigError",
    "DegenerateImmersionError",
    "DivergenceError",
    "DomainError",
    "HypothesisError",
    "LinearSolveError",
    "NoInstabilityError",
    "NotConformalError",
    "SearchError",
    "UnsupportedCurveError",
]


class CmcLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CmcLabError, ValueError):
    """A point, region or parameter lies outside the admissible domain."""


class CapabilityError(CmcLabError, RuntimeError):
    """The requested operation is not supported for this input kind."""


class HypothesisError(CmcLabError, ValueError):
    """Input violates a stated hypothesis of the identity being checked."""


class NotConformalError(CmcLabError, ValueError):
    """Conformality residual of an immersion exceeds its tolerance."""


class DegenerateImmersionError(CmcLabError, ValueError):
    """Induced conformal factor is not positive at some sample."""


class UnsupportedCurveError(CmcLabError, ValueError):
    """No curve of the requested constant geodesic curvature is available."""


class DivergenceError(CmcLabError, RuntimeError):
    """Nonlinear iteration produced a non-finite iterate."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class LinearSolveError(CmcLabError, RuntimeError):
    """Sparse linear solve failed (singular or badly scaled Jacobian)."""


class SearchError(CmcLabError, RuntimeError):
    """A bracketing / bisection search failed to isolate its target."""


class NoInstabilityError(CmcLabError, ValueError):
    """No unstable domain exists for the requested parameters."""


class ConfigError(CmcLabError, ValueError):
    """A chart or scenario configuration file could not be interpreted."""
