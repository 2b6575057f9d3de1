"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Inconsistent dimensions or an invalid environment/experiment config."""


class NotErgodicError(RuntimeError):
    """The chain has no unique stationary distribution (numerically)."""


class DiagnosticsError(RuntimeError):
    """An iterative solver failed to converge within its iteration cap."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NumericalConditioningError(RuntimeError):
    """A computed matrix failed its defining identities beyond tolerance."""
