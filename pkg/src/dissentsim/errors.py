"""Exception types shared across the simulator."""

from __future__ import annotations


class DissentSimError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(DissentSimError, ValueError):
    """An input violates a documented precondition (non-finite, out of range, wrong variant)."""


class NotFoundError(DissentSimError, LookupError):
    """An agent id is not present where it was expected (network, position map, weights)."""


class ConvergenceError(DissentSimError, RuntimeError):
    """An iterative solve ran out of iterations.

    Carries the last iterate and its residual so callers can inspect how far
    the solve got.
    """

    def __init__(self, message: str, last_iterate=None, residual: float | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class ScenarioParseError(DissentSimError, ValueError):
    """The scenario document is not syntactically valid JSON."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class ScenarioValidationError(DissentSimError, ValueError):
    """The scenario document is well-formed JSON but violates the schema.

    ``violations`` lists human-readable entries of the form
    ``"<field path>: <violated rule>"`` so callers can report all problems at
    once instead of failing on the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) if self.violations else "invalid scenario")


class GenerationError(DissentSimError, RuntimeError):
    """Population sampling exceeded its rejection retry cap for some group."""
