"""Exception hierarchy shared by all roughtail modules."""

from __future__ import annotations


class RoughTailError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(RoughTailError):
    """Operands live in incompatible tensor algebras (dim or level differ)."""


class GridError(RoughTailError):
    """A time grid is too short, non-monotone, or inconsistent between operands."""


class FeasibilityError(RoughTailError):
    """Requested parameters violate the admissible (rho, p, q, level) region."""


class ConfigError(RoughTailError):
    """Invalid experiment or CLI configuration."""


class NumericError(RoughTailError):
    """Numerical failure: non-positive-definite embedding, failed refinement, ..."""


class ExplosionError(NumericError):
    """A solver state left the trust region.  Carries the first bad time."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class BoundViolationError(RoughTailError):
    """Empirical survival exceeded the theoretical tail curve somewhere.

    ``violations`` lists (threshold, survival_upper_ci, bound) triples; the
    offending report is attached so callers can still persist it.
    """

    def __init__(self, message: str, violations, report=None):
        super().__init__(message)
        self.violations = violations
        self.report = report
