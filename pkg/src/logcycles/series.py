"""Truncated formal power series and the exp recurrence behind every h_n table.

Coefficients are stored as float64 numpy arrays, index n holding [t^n].
All products are direct O(N^2) convolutions.

For the normalization constants, whose logarithm grows like
log^{k+1}(n)/(k+1), the exp recurrence also runs in a rescaled mode that
returns ``(sign, log|coefficient|)`` pairs and never overflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._errors import DomainError, UsageError

__all__ = [
    "TruncatedSeries",
    "LogSpaceSeries",
    "series_mul",
    "series_exp",
    "series_log",
    "to_logspace",
    "series_exp_logspace",
    "exp_recurrence",
]

_BIG = 1e200
_TINY = 1e-200
_FLUSH = 1e-290


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """Coefficients a_0..a_N of a power series truncated at order N."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float, copy=True).ravel()
        if c.size == 0:
            raise UsageError("a truncated series needs at least the constant term")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def zeros(cls, N):
        return cls(np.zeros(N + 1))

    @classmethod
    def from_function(cls, f, N):
        """Series with coefficient ``f(n)`` at index n."""
        return cls(np.array([f(n) for n in range(N + 1)], dtype=float))

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return self.coeffs.size

    def __add__(self, other):
        _check_same_order(self, other)
        return TruncatedSeries(self.coeffs + other.coeffs)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return TruncatedSeries(self.coeffs * float(other))

    __rmul__ = __mul__

    def __repr__(self):
        head = ", ".join(f"{x:.6g}" for x in self.coeffs[:6])
        more = ", ..." if self.N > 5 else ""
        return f"TruncatedSeries(N={self.N}, [{head}{more}])"


@dataclass(frozen=True, eq=False)
class LogSpaceSeries:
    """Coefficients stored as sign in {-1, 0, 1} and natural log of the magnitude.

    Zero coefficients carry sign 0 and ``logabs = -inf``.
    """

    signs: np.ndarray
    logabs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=np.int8).copy()
        la = np.asarray(self.logabs, dtype=float).copy()
        if s.shape != la.shape:
            raise UsageError("signs and logabs must have equal length")
        if np.any((s == 0) != np.isneginf(la)):
            raise UsageError("sign 0 must coincide with logabs = -inf")
        s.setflags(write=False)
        la.setflags(write=False)
        object.__setattr__(self, "signs", s)
        object.__setattr__(self, "logabs", la)

    @property
    def N(self) -> int:
        return self.logabs.size - 1

    def __len__(self):
        return self.logabs.size

    def to_series(self) -> TruncatedSeries:
        """Back to plain floats; magnitudes beyond double range become inf."""
        with np.errstate(over="ignore"):
            return TruncatedSeries(self.signs * np.exp(self.logabs))


def _check_same_order(a, b):
    if a.N != b.N:
        raise UsageError(f"truncation orders differ: {a.N} vs {b.N}")


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at the common order N."""
    _check_same_order(a, b)
    return TruncatedSeries(np.convolve(a.coeffs, b.coeffs)[: a.N + 1])


def exp_recurrence(b, log_output=False):
    """Solve ``n e_n = sum_{m=1}^n b_m e_{n-m}``, ``e_0 = 1``, for n <= len(b)-1.

    ``b_m = m a_m`` are the coefficients of ``t d/dt`` of the exponent, so
    ``e`` is the series of ``exp(sum_m a_m t^m)``. ``b[0]`` is ignored.

    With ``log_output`` the working vector is rescaled by powers of 1e200
    whenever it leaves [1e-200, 1e200]; entries that fall below 1e-290 after
    rescaling are dropped (they are at least 1e-490 times the current
    magnitude). Returns ``(signs, logabs)`` in that case, otherwise a float
    array.
    """
    b = np.asarray(b, dtype=float)
    N = b.size - 1
    if N < 0:
        raise UsageError("empty exponent")
    rev = np.ascontiguousarray(b[1:][::-1])  # rev[i] = b_{N-i}
    e = np.zeros(N + 1)
    e[0] = 1.0
    if not log_output:
        for n in range(1, N + 1):
            e[n] = np.dot(rev[N - n :], e[:n]) / n
        return e

    signs = np.zeros(N + 1, dtype=np.int8)
    logabs = np.full(N + 1, -np.inf)
    signs[0] = 1
    logabs[0] = 0.0
    shift = 0.0  # true value = e[j] * exp(shift) for every live entry
    lg_big = math.log(_BIG)
    for n in range(1, N + 1):
        val = np.dot(rev[N - n :], e[:n]) / n
        e[n] = val
        if val == 0.0:
            continue
        av = abs(val)
        signs[n] = 1 if val > 0 else -1
        logabs[n] = math.log(av) + shift
        if av > _BIG:
            e[: n + 1] *= _TINY
            e[: n + 1][np.abs(e[: n + 1]) < _FLUSH] = 0.0
            shift += lg_big
        elif av < _TINY and np.max(np.abs(e[: n + 1])) < _TINY:
            e[: n + 1] *= _BIG
            shift -= lg_big
    return signs, logabs


def series_exp(a: TruncatedSeries) -> TruncatedSeries:
    """exp(a) for a series with zero constant term."""
    if a.coeffs[0] != 0:
        raise DomainError("series_exp needs a_0 = 0")
    m = np.arange(a.N + 1, dtype=float)
    return TruncatedSeries(exp_recurrence(m * a.coeffs))


def series_exp_logspace(a: TruncatedSeries) -> LogSpaceSeries:
    """exp(a) in log space; usable when the coefficients overflow doubles."""
    if a.coeffs[0] != 0:
        raise DomainError("series_exp needs a_0 = 0")
    m = np.arange(a.N + 1, dtype=float)
    signs, logabs = exp_recurrence(m * a.coeffs, log_output=True)
    return LogSpaceSeries(signs, logabs)


def series_log(a: TruncatedSeries) -> TruncatedSeries:
    """log(a) for a series with constant term 1."""
    if a.coeffs[0] != 1:
        raise DomainError("series_log needs a_0 = 1")
    N = a.N
    c = a.coeffs
    # n l_n = n a_n - sum_{m=1}^{n-1} m l_m a_{n-m}
    ml = np.zeros(N + 1)  # ml[m] = m * l_m
    rev = np.ascontiguousarray(c[::-1])  # rev[i] = a_{N-i}
    for n in range(1, N + 1):
        # sum_{m=1}^{n-1} ml[m] * a_{n-m}; a_{n-m} = rev[N-n+m]
        ml[n] = n * c[n] - np.dot(ml[1:n], rev[N - n + 1 : N])
    out = np.zeros(N + 1)
    out[1:] = ml[1:] / np.arange(1, N + 1)
    return TruncatedSeries(out)


def to_logspace(a: TruncatedSeries) -> LogSpaceSeries:
    c = a.coeffs
    with np.errstate(divide="ignore"):
        return LogSpaceSeries(np.sign(c).astype(np.int8), np.log(np.abs(c)))
