"""
Exception types raised across the delivery model, simulator and CLI.
"""


class V2XError(Exception):
    """Base class for every error the package raises on purpose."""


class InvalidRegimeError(V2XError, ValueError):
    """A closed-form term was requested for a scenario with zero probability."""


class QuadratureError(V2XError, RuntimeError):
    """Adaptive integration did not reach the requested tolerance."""


class NoRouteError(V2XError, ValueError):
    """The destination cannot be reached from the source."""


class LoopDetectedError(V2XError, RuntimeError):
    """Perimeter traversal revisited a directed edge."""


class UnknownSchemeError(V2XError, ValueError):
    """Broadcast scheme or beam count missing from the lookup table."""


class InvalidDimensionsError(V2XError, ValueError):
    """Grid scenario requested with fewer than two rows or columns."""


class ConfigError(V2XError, ValueError):
    """A scenario or sweep configuration could not be parsed."""
