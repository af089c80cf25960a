"""
Error hierarchy. Each class carries the process exit code the CLI uses.

Codes start at 10 so they never collide with click (1 for uncaught
exceptions, 2 for usage errors).
"""


class EcaError(Exception):
    """Base class for every error raised by ecakit."""

    exit_code = 10


class ConfigError(EcaError):
    """Invalid option value or inconsistent request."""

    exit_code = 11


class DimensionError(EcaError):
    """Operand shapes do not agree."""

    exit_code = 12


class FormatError(EcaError):
    """Malformed matrix file or document."""

    exit_code = 13


class NumericsError(EcaError):
    """A computation produced NaN or Inf."""

    exit_code = 14


class DegenerateVectorError(NumericsError):
    """A zero-norm vector was normalized."""

    exit_code = 15


class DegenerateDataError(EcaError):
    """Data without variance where variance is required."""

    exit_code = 16


class StateError(EcaError):
    """Operation requires a fitted model."""

    exit_code = 17


class IoError(EcaError):
    """File could not be read or written."""

    exit_code = 18
