"""Exception hierarchy."""


class MonoproxError(Exception):
    """Base class for all library errors."""


class DimensionError(MonoproxError, ValueError):
    """Point or operator dimensions do not match."""


class UnsupportedOperatorError(MonoproxError):
    """Requested oracle is not available for this operator kind."""


class NoZeroError(MonoproxError):
    """The operator has no zero, so the initial distance d0 is undefined."""


class Solved(MonoproxError):
    """The current point is already a zero of the operator."""


class NumericalFailure(MonoproxError):
    """An iterative search exceeded its iteration budget."""


class InvalidCertificateError(MonoproxError):
    """A step oracle returned a certificate violating the error criterion."""

    def __init__(self, k, slack, message=None):
        self.k = k
        self.slack = slack
        super().__init__(
            message or f"step {k}: certificate violates the error criterion (slack {slack:.6e})"
        )


class ConfigError(MonoproxError):
    """Experiment configuration failed validation."""
