"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes (see cli.py): configuration
problems, data problems, and I/O problems are reported separately.
"""


class MsRocketError(Exception):
    """Base class for all package errors."""


class InvalidConfigurationError(MsRocketError):
    """A run/kernel/CV configuration that cannot be executed."""


class InvalidArgumentError(MsRocketError, ValueError):
    """An operation was called with arguments outside its contract."""


class InvalidTrainingSetError(MsRocketError):
    """Training data unusable, e.g. only one class present."""


class DataError(MsRocketError):
    """Input data is malformed or unusable."""


class UnsupportedRateError(DataError):
    """Sample rate is not an integer multiple of the target rate."""


class DegenerateSignalError(DataError):
    """Signal statistics are degenerate (e.g. zero interquartile range)."""


class UndefinedTestError(MsRocketError):
    """A statistical test is undefined on the given data."""
