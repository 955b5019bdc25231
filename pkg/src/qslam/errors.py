"""Exception types shared across the package."""


class QslamError(Exception):
    """Base class for all package-specific errors."""


class DegenerateGeometry(QslamError):
    """A geometric construction is undefined for the given configuration."""


class NoIntersection(QslamError):
    """Ray or curve intersection required by an operation does not exist."""


class ConfigurationError(QslamError):
    """A partition, tensor, or solver configuration is invalid."""


class GenerationError(QslamError):
    """Random scenario generation failed to satisfy its constraints."""


class ParseError(QslamError):
    """An input file could not be parsed."""
