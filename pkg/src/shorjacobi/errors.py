"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class ShorJacobiError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class DomainError(ShorJacobiError, ValueError):
    """An argument is outside the mathematical domain of the operation."""

    exit_code = 1


class ResourceCapError(ShorJacobiError):
    """A configured size or attempt budget was exceeded."""

    exit_code = 3


class ConsistencyError(ShorJacobiError, AssertionError):
    """Internal cross-check failed (e.g. an order oracle returned a non-order)."""

    exit_code = 2
