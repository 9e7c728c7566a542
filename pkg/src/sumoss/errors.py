"""Exception hierarchy and the CLI exit codes attached to it."""


class SumossError(Exception):
    exit_code = 1


class ConfigError(SumossError, ValueError):
    """Malformed or inconsistent configuration."""

    exit_code = 2


class DegenerateInputError(SumossError, ValueError):
    """A covariance matrix is singular or a conditional variance vanished."""

    exit_code = 3


class CapacityError(SumossError, ValueError):
    """Planning requested beyond the admissible number of sensors."""

    exit_code = 4


class LogValidationError(SumossError, ValueError):
    """A mission log is malformed or fails self-consistency."""

    exit_code = 5
