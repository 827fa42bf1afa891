"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class RmxError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(RmxError, ValueError):
    """Parameter outside the model's parameter domain."""


class DegenerateParametrization(RmxError, ValueError):
    """Singular Jacobian of an exponential-family parametrization."""


class RankDeficiency(RmxError, ValueError):
    """Fisher information (or a standardizing matrix) is numerically singular."""


class QuadratureFailure(RmxError, RuntimeError):
    """Adaptive quadrature did not converge within the node budget."""

    def __init__(self, message: str, estimates=None):
        super().__init__(message)
        self.estimates = estimates


class SolverFailure(RmxError, RuntimeError):
    """A multiplier solver did not converge.

    ``history`` holds the residual/relative-change trace of the iteration.
    """

    def __init__(self, message: str, history=None, suggestion=None):
        super().__init__(message)
        self.history = list(history or [])
        self.suggestion = suggestion


class UnsupportedDimension(RmxError, ValueError):
    """Exact total-variation solution requested for k > 1."""


class NoCrossing(RmxError, RuntimeError):
    """Relative-MSE difference does not change sign on the radius interval."""

    def __init__(self, message: str, endpoint_values=None):
        super().__init__(message)
        self.endpoint_values = endpoint_values


class InvalidData(RmxError, ValueError):
    """Malformed, empty, or out-of-support data."""


class DegenerateScale(InvalidData):
    """Scale estimate is zero (too many tied observations)."""


class InvalidStart(RmxError, ValueError):
    """Starting estimate outside the parameter domain."""


class InvalidTangent(RmxError, ValueError):
    """Tangent violates the preconditions of a simple perturbation."""


class OutOfSupport(RmxError, ValueError):
    """Evaluation point outside the extension domain of an IC."""


class OptimizerFailure(RmxError, RuntimeError):
    """Minimum-distance / likelihood optimization failed.

    ``best`` carries the best parameter found.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best
