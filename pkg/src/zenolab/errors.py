"""Exception and warning types shared across the package.

Every error raised on purpose derives from :class:`ZenoLabError`, so callers
(the CLI in particular) can separate domain failures from programming bugs.
"""

from __future__ import annotations


class ZenoLabError(Exception):
    """Base class for all deliberate failures."""


class InvalidInputError(ZenoLabError, ValueError):
    """Malformed, non-finite or dimensionally inconsistent input."""


class ContractViolationError(InvalidInputError):
    """An operation was called outside the hypotheses it relies on."""


class ConfigurationError(ZenoLabError, ValueError):
    """Run parameters that cannot produce a trustworthy result."""


class ResolutionError(ConfigurationError):
    """A grid, step or panel budget is too coarse for the requested output."""


class RegimeError(ZenoLabError, ValueError):
    """Physical parameters outside the regime a model is valid in."""


class DomainError(InvalidInputError):
    """Argument outside the domain of definition (e.g. wrong half plane)."""


class BoundaryError(DomainError):
    """Evaluation exactly on a branch cut of the first sheet."""


class EndpointSingularityError(DomainError):
    """Evaluation at a support endpoint where boundary values diverge."""


class UnsupportedContinuationError(ZenoLabError, NotImplementedError):
    """No principled analytic continuation exists for this input."""


class NumericFailureError(ZenoLabError, ArithmeticError):
    """An iterative or series computation did not reach its target.

    ``residual`` carries the best residual or error estimate achieved.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class DivergentRateError(NumericFailureError):
    """Effective rate requested at a zero of the survival probability."""


class SolverError(NumericFailureError):
    """Pole search failed; ``trajectory`` lists the visited iterates."""

    def __init__(self, message: str, residual: float | None = None, trajectory=()):
        super().__init__(message, residual)
        self.trajectory = list(trajectory)


class ConsistencyError(NumericFailureError):
    """A computed quantity violates an identity it must satisfy."""


class WindowError(ZenoLabError, ValueError):
    """A time series does not cover the regime a fit needs."""


class RegimeWarning(UserWarning):
    """Parameters are valid but outside the comfortable asymptotic regime."""


class OutOfBandWarning(UserWarning):
    """Energy lies outside the continuum support: no on-shell decay channel."""


class FirstSheetWarning(UserWarning):
    """The coupling may be large enough to create first-sheet singularities."""
