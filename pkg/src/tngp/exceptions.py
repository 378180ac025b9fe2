"""Exception types raised by tngp."""


class TNGPError(Exception):
    """Base class; ``code`` is the short machine-readable tag used by the CLI."""

    code = "error"


class DomainError(TNGPError, ValueError):
    code = "domain"


class ConfigError(TNGPError, ValueError):
    code = "config"


class SizeError(TNGPError, ValueError):
    """Raised when an operation would materialize an object above its cap."""

    code = "size"


class ShapeError(TNGPError, ValueError):
    code = "shape"


class DataError(TNGPError, ValueError):
    code = "data"


class FactorizationError(TNGPError, ArithmeticError):
    code = "factorization"
