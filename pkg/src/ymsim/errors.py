"""Exception types shared across the package."""


class YMSimError(Exception):
    """Base class for all package errors."""


class InvalidParameter(YMSimError, ValueError):
    pass


class InvalidConfig(YMSimError, ValueError):
    """An occupation configuration or run configuration is out of range."""


class KinematicsError(YMSimError, ValueError):
    """A mode has (near-)zero energy, so the 1/sqrt(2 omega) measure diverges."""


class ConfigurationError(YMSimError):
    """The requested operation is incompatible with the model configuration."""


class NotCoveredError(YMSimError):
    """A closed-form decomposition was asked for a case it does not cover."""


class CapacityError(YMSimError):
    """A dense object would exceed the configured qubit limit.

    ``layout`` is attached when the error comes from ``build_layout`` so callers
    that only need gate counts can keep going.
    """

    def __init__(self, message, layout=None):
        super().__init__(message)
        self.layout = layout
