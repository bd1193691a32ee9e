"""Exception types shared across the package."""


class SpecContError(Exception):
    """Base class for all package errors."""


class DomainError(SpecContError, ValueError):
    """An argument is outside its mathematical domain."""


class ConfigError(SpecContError, ValueError):
    """Invalid configuration (grid bounds, counts, hyperparameters)."""


class ShapeError(SpecContError, ValueError):
    """Array shapes do not match the operation's contract."""


class NumericError(SpecContError, ArithmeticError):
    """NaN/Inf encountered or an iteration failed to converge."""


class FormatError(SpecContError, ValueError):
    """A persisted file does not match the documented container layout."""


class VersionError(FormatError):
    """Container format version is not supported."""
