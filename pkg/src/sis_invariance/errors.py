class SISError(Exception):
    """Base class for all errors raised by this package."""


class SpectrumError(SISError, ValueError):
    """Invalid generator specification or failed spectrum evaluation."""


class GridError(SISError, ValueError):
    """Frequency grid mismatch or misalignment."""


class HypothesisViolation(SISError):
    """An operation was called on input outside the mathematical preconditions it relies on."""


class ConfigError(SISError, ValueError):
    """Schema violation in an analysis configuration."""


class ReportIOError(SISError, OSError):
    """Failure writing a report or CSV bundle."""
