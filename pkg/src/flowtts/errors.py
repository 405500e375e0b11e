"""Shared exception types.

The CLI maps these to exit codes: DataError -> 3, NumericFault -> 4.
Contract violations (bad shapes, bad arguments) raise ValueError.
"""


class DataError(Exception):
    """Problem with user-supplied data: missing files, bad formats, empty inputs."""


class AllSilentError(DataError):
    """Every frame of the signal is below the silence threshold."""


class NumericFault(RuntimeError):
    """NaN or Inf appeared where finite values are required."""
