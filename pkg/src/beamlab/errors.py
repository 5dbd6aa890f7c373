"""Exception types shared by every module."""


class BeamError(Exception):
    """Base class for all package errors."""


class ConfigError(BeamError, ValueError):
    """A precondition or configuration constraint was violated.

    ``constraint`` names the violated rule so reports can echo it.
    """

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint or message


class NumericalError(BeamError, RuntimeError):
    """A numerical procedure failed (divergence, tolerance not met, ...)."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload or {}
