"""Exception types shared across the package."""


class ReputaxError(Exception):
    """Base class for package errors."""


class EconomyDomainError(ReputaxError, ValueError):
    """Inputs leave the economic domain (tax rate out of range, nonpositive consumption)."""


class BracketingError(ReputaxError, RuntimeError):
    """A bracketed root search found no sign change; signals invalid primitives."""


class ConvergenceError(ReputaxError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class ConfigError(ReputaxError, ValueError):
    """A run configuration is malformed (unknown key, bad type, out-of-range value)."""
