"""Exception hierarchy shared by all modules.

The CLI maps each family to a process exit code (see ``hyperntf.cli``).
"""


class HyperNTFError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(HyperNTFError, ValueError):
    """An argument is out of range or has an incompatible shape."""


class ConfigError(InvalidArgumentError):
    """An experiment configuration field is missing or invalid."""


class DataError(HyperNTFError, ValueError):
    """Input data violates a requirement, e.g. negative entries."""


class FormatError(DataError):
    """A file does not follow the expected binary/text layout."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class TruncationError(FormatError):
    """A file ends before its declared payload is complete."""


class NumericFailureError(HyperNTFError, ArithmeticError):
    """A numerical procedure could not produce a valid result."""


class DegenerateRankError(NumericFailureError):
    """A factor column collapsed to zero, so the rank cannot be kept."""

    def __init__(self, column, iteration=None):
        msg = f"factor column {column} is identically zero"
        if iteration is not None:
            msg += f" at iteration {iteration}"
        super().__init__(msg)
        self.column = column
        self.iteration = iteration


class DegenerateSpectrumError(NumericFailureError):
    """Not enough nonzero Laplacian eigenvalues for the requested embedding."""
