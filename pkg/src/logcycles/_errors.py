"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: usage errors to 2, domain errors to 3,
numerical failures to 4.
"""


class LogCyclesError(Exception):
    """Base class for all package errors."""


class UsageError(LogCyclesError, ValueError):
    """Invalid combination of arguments (sizes, mismatched truncations)."""


class DomainError(LogCyclesError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class MeasureUndefinedError(DomainError):
    """The normalization constant h_n vanishes, so P_Theta is undefined on S_n."""


class NumericalError(LogCyclesError, ArithmeticError):
    """Ill-conditioned fit, failed root bracket or non-convergence."""
