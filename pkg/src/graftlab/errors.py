"""Exception types shared across the library."""


class GraftLabError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(GraftLabError, ValueError):
    """Operands have incompatible dimensions."""


class SpectralError(GraftLabError, RuntimeError):
    """An eigenvalue or singular-value computation failed.

    Raised instead of returning a silently wrong (e.g. zero) spectrum.
    """


class NonUnimodular(GraftLabError, ValueError):
    """Input matrix does not have determinant one within tolerance."""


class NotLoxodromic(GraftLabError, ValueError):
    """Operation requires strict eigenvalue gaps."""


class DomainError(GraftLabError, ValueError):
    """Input lies outside the operation's admissible region."""


class ProjectionError(GraftLabError, RuntimeError):
    """Polytope projection did not converge within its iteration cap."""


class ScenarioError(GraftLabError, ValueError):
    """A scenario file is malformed or contains unknown keys."""
