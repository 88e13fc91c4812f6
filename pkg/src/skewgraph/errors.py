"""Exception types shared across the package."""


class SkewGraphError(Exception):
    """Base class for all package errors."""


class InvalidShift(SkewGraphError, ValueError):
    pass


class NonClosableWord(SkewGraphError, ValueError):
    pass


class BudgetExceeded(SkewGraphError, RuntimeError):
    """An enumeration would exceed the configured word/point budget."""


class DepthTooLarge(BudgetExceeded):
    pass


class NotMonotone(SkewGraphError, ValueError):
    """The pressure function is not strictly decreasing in the root variable."""


class BracketFailure(SkewGraphError, RuntimeError):
    pass


class InvalidParameters(SkewGraphError, ValueError):
    pass


class ConfigError(SkewGraphError, ValueError):
    pass


class InsufficientResolution(SkewGraphError, ValueError):
    pass


class UndersampledScale(SkewGraphError, ValueError):
    def __init__(self, message, scales=()):
        super().__init__(message)
        self.scales = tuple(scales)


class NotBlenderRegime(SkewGraphError, ValueError):
    pass


class LipschitzHeightZero(UserWarning):
    """Informational: the graph is Lipschitz, so unstable rectangles have zero height."""
