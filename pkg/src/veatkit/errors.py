"""Exception types shared across the toolkit.

Every anticipated failure raises a subclass of :class:`VeatkitError` so the
CLI can map validation problems to exit code 1 and I/O problems to exit
code 2 without pattern-matching on messages.
"""

from __future__ import annotations


class VeatkitError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(VeatkitError):
    """Vectors or sets with incompatible dimensions were combined."""


class ZeroVectorError(VeatkitError):
    """An all-zeros vector was supplied where cosine similarity is needed."""


class DegenerateDistributionError(VeatkitError):
    """A statistic is undefined because the underlying spread is zero.

    Raised instead of returning +/-inf or NaN, e.g. for an effect size whose
    pooled standard deviation is zero, or a kappa whose expected agreement
    is exactly 1.
    """


class InvalidInputError(VeatkitError):
    """Arguments violate a documented precondition."""


class ArchiveFormatError(VeatkitError):
    """An embedding archive record is malformed.

    Carries the 1-based line number of the offending record when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BatteryConfigError(VeatkitError):
    """A battery configuration does not resolve to a runnable battery."""


class BatteryRunError(VeatkitError):
    """A test inside a battery failed; the message names the test."""
