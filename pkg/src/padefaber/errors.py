"""Exception hierarchy for padefaber."""


class PadeFaberError(Exception):
    """Base class for all library errors."""


class PointInsideError(PadeFaberError, ValueError):
    """Raised when the exterior map is requested at a point of E."""


class QuadratureError(PadeFaberError, ArithmeticError):
    """Raised when a sampled integrand is not finite."""


class IndeterminateRateError(PadeFaberError, ArithmeticError):
    """Raised when a geometric rate cannot be estimated from coefficients."""


class InsufficientDataError(PadeFaberError, ValueError):
    """Raised when a rate fit has too few usable points."""


class RootFindingError(PadeFaberError, ArithmeticError):
    """Raised when computed roots fail the backward-error check."""


class PoleEvaluationError(PadeFaberError, ZeroDivisionError):
    """Raised when a rational approximant is evaluated at a zero of its denominator."""


class ConfigError(PadeFaberError, ValueError):
    """Raised for schema violations in an experiment config.

    The offending key path is kept in :attr:`path`.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
