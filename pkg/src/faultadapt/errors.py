"""Exception types shared across the package."""


class FaultAdaptError(Exception):
    """Base class for all package errors."""


class ConfigurationError(FaultAdaptError):
    """Invalid network/layer configuration or shape mismatch."""


class InputError(FaultAdaptError):
    """Invalid user-supplied data (labels out of range, empty batch, ...)."""


class ParseError(FaultAdaptError):
    """Malformed CSV or config file; message names the offending row/line."""


class TrainingAborted(FaultAdaptError):
    """Non-finite loss or gradient encountered during optimization."""
