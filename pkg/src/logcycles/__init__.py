"""Random permutations with logarithmic cycle weights.

Exact tables, saddle-point asymptotics, total variation bounds, an exact
sampler and limit-shape statistics for the measure on permutations that
weights each cycle of length m by theta_m = log^k m + lower-order terms.
"""
from ._errors import DomainError, LogCyclesError, MeasureUndefinedError, NumericalError, UsageError
from .weights import WeightKind, WeightModel, constant, custom, g_partial, log_power, theta, theta_array

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "LogCyclesError",
    "UsageError",
    "DomainError",
    "MeasureUndefinedError",
    "NumericalError",
    "WeightKind",
    "WeightModel",
    "log_power",
    "constant",
    "custom",
    "theta",
    "theta_array",
    "g_partial",
]
