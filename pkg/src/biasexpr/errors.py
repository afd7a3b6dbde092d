"""Exception hierarchy shared by every module."""


class BiasExprError(ValueError):
    """Base class for all errors raised by this package."""


class DimensionMismatch(BiasExprError):
    pass


class NegativeMass(BiasExprError):
    pass


class NotNormalized(BiasExprError):
    pass


class TooLarge(BiasExprError):
    """An enumeration would exceed the caller's cap."""


class InvalidAlgorithmSpec(BiasExprError):
    pass


class MissingStrategy(BiasExprError):
    pass


class InvalidParameter(BiasExprError):
    pass


class EmptySample(BiasExprError):
    pass


class ConfigError(BiasExprError):
    pass


class SchemaError(BiasExprError):
    """A resource-set document failed validation.

    ``location`` is a field path such as ``resources[1].strategy`` or a
    ``line N, column M`` string for syntax errors.
    """

    def __init__(self, location: str, message: str):
        self.location = location
        self.message = message
        super().__init__(f"{location}: {message}")
