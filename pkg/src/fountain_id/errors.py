"""Exception types shared across the package."""


class FountainIdError(Exception):
    """Base class for all package-specific errors."""


class InvalidSegment(FountainIdError):
    """Degenerate or ill-posed boundary-crossing segment."""


class InvalidInterior(FountainIdError):
    """Point expected strictly inside the unit disk is not."""


class InvalidSource(FountainIdError):
    """Source specification violates admissibility constraints."""


class InvalidDistribution(FountainIdError):
    """Probability vector fails validation (e.g. does not sum to 1)."""


class QuadratureFailed(FountainIdError):
    """Adaptive or refined quadrature did not converge to tolerance."""


class PathBudgetExceeded(FountainIdError):
    """A simulated path exhausted its step/event budget before exiting."""


class MixedProvenance(FountainIdError):
    """Attempt to merge estimates produced under different specs."""


class DimensionMismatch(FountainIdError):
    """Vector arguments have incompatible lengths."""


class ConfigError(FountainIdError):
    """Malformed or inconsistent configuration input."""
