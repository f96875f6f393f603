"""Cycle-weight models theta_m and the weight generating function g(t)."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._errors import DomainError, UsageError

__all__ = [
    "WeightKind",
    "WeightModel",
    "log_power",
    "constant",
    "custom",
    "theta",
    "theta_array",
    "g_partial",
]

#: number of cycle lengths scanned for negativity when lower-order
#: coefficients are supplied
VALIDATION_HORIZON = 10**6


class WeightKind(enum.Enum):
    LOG_POWER = "logpower"
    CONSTANT = "constant"
    CUSTOM = "custom"


@dataclass(frozen=True)
class WeightModel:
    """Immutable description of the weights theta_1, theta_2, ...

    ``LOG_POWER`` gives ``log^k m + sum_j a_j log^j m`` with ``a_j`` taken from
    ``lower_coeffs`` (index j, length at most k). ``CONSTANT`` gives
    ``theta_const`` for every m, and ``CUSTOM`` reads ``custom_seq[m-1]``.

    Use the :func:`log_power`, :func:`constant` and :func:`custom`
    constructors rather than building instances by hand.
    """

    kind: WeightKind
    k: int = 0
    lower_coeffs: tuple[float, ...] = ()
    theta_const: float = 0.0
    custom_seq: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind is WeightKind.LOG_POWER:
            if self.k < 1:
                raise DomainError(f"log-power weights need k >= 1, got k={self.k}")
            if len(self.lower_coeffs) > self.k:
                raise UsageError("at most k lower-order coefficients a_0..a_{k-1}")
            if any(a != 0 for a in self.lower_coeffs):
                th = _log_power_values(self.k, self.lower_coeffs, VALIDATION_HORIZON)
                bad = np.flatnonzero(th[1:] < 0)
                if bad.size:
                    m = int(bad[0]) + 1
                    raise DomainError(
                        f"negative weight theta_{m}={th[m]:.6g} for lower_coeffs={self.lower_coeffs}"
                    )
        elif self.kind is WeightKind.CONSTANT:
            if not self.theta_const >= 0:
                raise DomainError(f"constant weight must be >= 0, got {self.theta_const}")
        elif self.kind is WeightKind.CUSTOM:
            if any(not x >= 0 for x in self.custom_seq):
                raise DomainError("custom weights must be nonnegative")

    @property
    def horizon(self) -> int | None:
        """Largest m for which theta_m is defined (None when unbounded)."""
        if self.kind is WeightKind.CUSTOM:
            return len(self.custom_seq)
        return None

    def describe(self) -> dict:
        """Plain-dict form, used in output headers."""
        d: dict = {"kind": self.kind.value}
        if self.kind is WeightKind.LOG_POWER:
            d["k"] = self.k
            d["lower_coeffs"] = list(self.lower_coeffs)
        elif self.kind is WeightKind.CONSTANT:
            d["theta"] = self.theta_const
        else:
            d["length"] = len(self.custom_seq)
        return d


def log_power(k: int, lower_coeffs=()) -> WeightModel:
    """theta_m = log^k m + sum_{j<k} a_j log^j m (natural logarithm)."""
    return WeightModel(WeightKind.LOG_POWER, k=int(k), lower_coeffs=tuple(float(a) for a in lower_coeffs))


def constant(value: float) -> WeightModel:
    """Ewens weights theta_m = value (value = 1 is the uniform measure)."""
    return WeightModel(WeightKind.CONSTANT, theta_const=float(value))


def custom(seq) -> WeightModel:
    return WeightModel(WeightKind.CUSTOM, custom_seq=tuple(float(x) for x in seq))


def _horner(logm, k, lower_coeffs):
    # leading coefficient 1, then a_{k-1}, ..., a_0
    if not any(lower_coeffs):
        return logm**k
    acc = logm * 0.0 + 1.0
    for j in range(k - 1, -1, -1):
        a = lower_coeffs[j] if j < len(lower_coeffs) else 0.0
        acc = acc * logm + a
    return acc


def _log_power_values(k, lower_coeffs, N):
    out = np.zeros(N + 1)
    out[1:] = _horner(np.log(np.arange(1, N + 1, dtype=float)), k, lower_coeffs)
    # log 1 = 0 exactly, so theta_1 = a_0 without rounding
    out[1] = lower_coeffs[0] if lower_coeffs else 0.0
    return out


def theta(model: WeightModel, m: int) -> float:
    """Weight of a cycle of length ``m``."""
    if m < 1:
        raise DomainError(f"cycle length must be >= 1, got {m}")
    if model.kind is WeightKind.LOG_POWER:
        if m == 1:
            return model.lower_coeffs[0] if model.lower_coeffs else 0.0
        return float(_horner(np.log(float(m)), model.k, model.lower_coeffs))
    if model.kind is WeightKind.CONSTANT:
        return model.theta_const
    if m > len(model.custom_seq):
        raise UsageError(f"custom weights only defined up to m={len(model.custom_seq)}")
    return model.custom_seq[m - 1]


def theta_array(model: WeightModel, N: int) -> np.ndarray:
    """Array ``th`` of length N+1 with ``th[m] = theta_m`` and ``th[0] = 0``."""
    if N < 0:
        raise UsageError("N must be >= 0")
    if model.kind is WeightKind.LOG_POWER:
        return _log_power_values(model.k, model.lower_coeffs, N)
    if model.kind is WeightKind.CONSTANT:
        th = np.full(N + 1, model.theta_const)
        th[0] = 0.0
        return th
    if N > len(model.custom_seq):
        raise UsageError(f"custom weights only defined up to m={len(model.custom_seq)}, asked for {N}")
    return np.concatenate(([0.0], np.asarray(model.custom_seq[:N], dtype=float)))


def g_partial(model: WeightModel, t: float, N: int) -> float:
    """Partial sum ``sum_{m=1}^N theta_m t^m / m`` of the weight generating function."""
    if not 0 <= t < 1:
        raise DomainError(f"t must lie in [0, 1), got {t}")
    if N < 1:
        raise UsageError("N must be >= 1")
    if t == 0:
        return 0.0
    m = np.arange(1, N + 1, dtype=float)
    terms = theta_array(model, N)[1:] * np.power(t, m) / m
    return math.fsum(terms)
