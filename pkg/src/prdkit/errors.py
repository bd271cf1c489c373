"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so keep the classes coarse.
"""


class PRDError(Exception):
    """Base class for all errors raised by prdkit."""


class InvalidArgument(PRDError, ValueError):
    """A numeric precondition on an argument does not hold."""


class InvalidSplit(InvalidArgument):
    """A train/test split would leave one half empty."""


class ParseError(PRDError, ValueError):
    """An input file could not be parsed into the expected structure."""


class UndefinedMetric(InvalidArgument):
    """A curve summary is undefined for the given input (e.g. zero area)."""


class NotPositiveDefinite(InvalidArgument):
    """Cholesky factorization failed even after diagonal jitter."""
