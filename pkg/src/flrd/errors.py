"""Exception hierarchy shared by all flrd modules."""


class FlrdError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(FlrdError, ValueError):
    """An object or argument violates a structural invariant."""


class ModelValidationError(ValidationError):
    """A spectral model violates one of the modelling assumptions.

    ``assumption`` names the violated condition (e.g. ``"IV(i)"``) so that
    callers and the CLI can report it.
    """

    def __init__(self, message, assumption=None):
        super().__init__(message if assumption is None else f"[{assumption}] {message}")
        self.assumption = assumption


class SingularityError(ValidationError):
    """A symbol was evaluated at the excluded frequency omega = 0."""


class QuadratureError(FlrdError, ArithmeticError):
    """A quadrature produced non-finite values or failed an accuracy bracket."""


class NumericalConsistencyError(FlrdError, ArithmeticError):
    """A quantity that must be nonnegative (or real) came out otherwise."""


class EmbeddingError(FlrdError, ArithmeticError):
    """Circulant embedding produced too much negative spectral mass."""


class OptimizationError(FlrdError, ArithmeticError):
    """The contrast objective became non-finite during optimisation."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class ConfigError(FlrdError, ValueError):
    """A JSON configuration is missing a field or has an invalid value."""
