"""Exception hierarchy shared by every zetalab module.

The CLI maps these onto process exit codes (see ``zetalab.cli``).
"""


class ZetaLabError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigurationError(ZetaLabError):
    """Inconsistent or invalid settings (mismatched precision contexts, bad flags)."""

    exit_code = 2


class DomainError(ZetaLabError, ValueError):
    """An operation was called outside its mathematical domain."""

    exit_code = 2


class InputError(ZetaLabError, ValueError):
    """Input data is too short or malformed for the requested computation."""

    exit_code = 2


class PrecisionError(ZetaLabError, ArithmeticError):
    """The working precision is not enough to reach the requested accuracy."""

    exit_code = 3


class ConvergenceError(PrecisionError):
    """An iterative method did not converge within its iteration cap."""


class DegeneracyError(ZetaLabError, ArithmeticError):
    """A singular system or vanishing determinant where a nonzero one is required."""

    exit_code = 3
