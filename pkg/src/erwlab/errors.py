"""Exception hierarchy shared by all modules.

Each class maps to one CLI exit code.
"""


class ERWError(Exception):
    exit_code = 1


class DomainError(ERWError, ValueError):
    """An argument violates a documented precondition."""

    exit_code = 2


class UndefinedEstimateError(DomainError):
    """The estimator is undefined at this observation (e.g. S_n = 0)."""


class ResourceCapError(ERWError, RuntimeError):
    """The request exceeds a configured size cap."""

    exit_code = 3


class UnsupportedRegimeError(ERWError, ValueError):
    """The memory parameter lies outside the range a diagnostic supports."""

    exit_code = 4
