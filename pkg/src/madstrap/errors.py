"""Exception hierarchy shared by every module."""


class MadstrapError(Exception):
    """Base class for all package errors."""


class DomainError(MadstrapError, ValueError):
    """An argument lies outside the domain of the operation."""


class ModelUnsupportedError(MadstrapError):
    """The distribution model violates a structural requirement (e.g. no bracket for xi)."""


class DegenerateError(MadstrapError, ValueError):
    """A density or scale that must be positive is zero."""


class IntegrabilityError(MadstrapError):
    """A (model, weight) combination whose integrals are not known to converge."""


class SizeLimitError(MadstrapError):
    """Exact enumeration requested for a sample that is too large."""


class ConfigError(MadstrapError, ValueError):
    """Invalid experiment configuration. ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
