"""Exact finite-n laws under the weighted measure P_Theta.

The normalization constants satisfy ``sum_n h_n t^n = exp(g(t))``, which
after differentiating gives ``n h_n = sum_{m=1}^n theta_m h_{n-m}``. Every
table here is built from that recurrence; the partition enumerations
(:func:`enumerate_cycle_types`, :func:`brute_force_hn`) are kept separate
as an independent check for small n.

Functions taking an ``h`` argument accept either a float array ``h_0..h_N``
or the :class:`~logcycles.series.LogSpaceSeries` returned by
:func:`log_h_sequence`; when omitted the table is computed on the spot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from sympy.utilities.iterables import partitions

from ._errors import MeasureUndefinedError, NumericalError, UsageError
from .series import LogSpaceSeries, exp_recurrence
from .weights import WeightModel, theta_array

__all__ = [
    "CycleType",
    "DistributionTable",
    "h_sequence",
    "log_h_sequence",
    "restricted_h",
    "log_restricted_h",
    "cycle_type_prob",
    "enumerate_cycle_types",
    "brute_force_hn",
    "l1_distribution",
    "joint_counts_distribution",
    "k0n_distribution",
    "cycle_count_means",
    "k0n_moments",
]

BRUTE_FORCE_MAX_N = 14
JOINT_PRUNE = 1e-15


@dataclass(frozen=True, order=True)
class CycleType:
    """Cycle type of a permutation of n: pairs (m, c_m) with c_m >= 1, m ascending."""

    n: int
    counts: tuple[tuple[int, int], ...]

    def __post_init__(self):
        total = 0
        prev = 0
        for m, c in self.counts:
            if m <= prev or c < 1:
                raise UsageError(f"malformed cycle type {self.counts}")
            prev = m
            total += m * c
        if total != self.n:
            raise UsageError(f"cycle lengths sum to {total}, expected n={self.n}")

    @classmethod
    def from_dict(cls, counts: dict) -> "CycleType":
        items = tuple(sorted((int(m), int(c)) for m, c in counts.items() if c))
        return cls(sum(m * c for m, c in items), items)

    @classmethod
    def from_lengths(cls, lengths) -> "CycleType":
        d: dict[int, int] = {}
        for m in lengths:
            d[int(m)] = d.get(int(m), 0) + 1
        return cls.from_dict(d)

    def as_dict(self) -> dict[int, int]:
        return dict(self.counts)

    def count(self, m: int) -> int:
        return self.as_dict().get(m, 0)

    @property
    def num_cycles(self) -> int:
        return sum(c for _, c in self.counts)

    def lengths(self) -> list[int]:
        return [m for m, c in self.counts for _ in range(c)]

    def __str__(self):
        return f"{self.n}: " + " ".join(f"{m}^{c}" for m, c in self.counts)


@dataclass
class DistributionTable:
    """Finite law: outcomes and their probabilities.

    ``deficit`` is probability mass deliberately left out of ``support``
    (truncated tails); ``sum(probs) + deficit`` is 1 up to rounding.
    """

    support: list
    probs: np.ndarray
    deficit: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if len(self.support) != self.probs.size:
            raise UsageError("support and probs differ in length")
        if np.any(self.probs < 0):
            raise NumericalError("negative probability in table")
        total = float(self.probs.sum()) + self.deficit
        if abs(total - 1.0) > 1e-9:
            raise NumericalError(f"table mass {total!r} is not 1")

    def prob(self, outcome) -> float:
        try:
            return float(self.probs[self.support.index(outcome)])
        except ValueError:
            return 0.0

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs.tolist()))

    def mean(self) -> float:
        return float(np.dot(np.asarray(self.support, dtype=float), self.probs))

    def moment(self, j: int) -> float:
        return float(np.dot(np.asarray(self.support, dtype=float) ** j, self.probs))

    def marginal(self, i: int) -> "DistributionTable":
        """Law of coordinate ``i`` for tuple-valued outcomes."""
        acc: dict[int, float] = {}
        for a, p in zip(self.support, self.probs):
            acc[a[i]] = acc.get(a[i], 0.0) + p
        keys = sorted(acc)
        return DistributionTable(keys, [acc[x] for x in keys], self.deficit)


def log_h_sequence(model: WeightModel, N: int, excluded=()) -> LogSpaceSeries:
    """log h_0..log h_N, never overflowing. ``excluded`` removes cycle lengths."""
    if N < 0:
        raise UsageError("N must be >= 0")
    th = theta_array(model, N)
    for m in excluded:
        if 1 <= m <= N:
            th[m] = 0.0
    signs, logabs = exp_recurrence(th, log_output=True)
    return LogSpaceSeries(signs, logabs)


def h_sequence(model: WeightModel, N: int) -> np.ndarray:
    """Normalization constants h_0..h_N as floats (h_0 = 1)."""
    return restricted_h(model, N, ())


def restricted_h(model: WeightModel, N: int, excluded) -> np.ndarray:
    """Coefficients of ``exp(sum_{m not in excluded} theta_m t^m / m)``."""
    if N < 0:
        raise UsageError("N must be >= 0")
    th = theta_array(model, N)
    for m in excluded:
        if 1 <= m <= N:
            th[m] = 0.0
    with np.errstate(over="raise", invalid="raise"):
        try:
            h = exp_recurrence(th)
        except FloatingPointError:
            raise NumericalError("h_n overflows double range; use log_h_sequence") from None
    if not np.all(np.isfinite(h)):
        raise NumericalError("h_n overflows double range; use log_h_sequence")
    return h


def log_restricted_h(model: WeightModel, N: int, excluded) -> LogSpaceSeries:
    return log_h_sequence(model, N, excluded)


def _logh(model, n, h):
    """Natural log of h_0..h_n as a float array (-inf where h vanishes)."""
    if h is None:
        return log_h_sequence(model, n).logabs
    if isinstance(h, LogSpaceSeries):
        la = h.logabs
    else:
        arr = np.asarray(h, dtype=float)
        with np.errstate(divide="ignore"):
            la = np.log(arr)
    if la.size < n + 1:
        raise UsageError(f"h table has {la.size} entries, need h_{n}")
    return la


def _as_logspace(la):
    return LogSpaceSeries(np.where(np.isneginf(la), 0, 1), la)


def _require_positive(logh_n, n):
    if not np.isfinite(logh_n):
        raise MeasureUndefinedError(f"h_{n} = 0: the measure is undefined on S_{n}")


def _log_theta_over_m(model, N):
    th = theta_array(model, N)
    with np.errstate(divide="ignore"):
        out = np.log(th) - np.log(np.maximum(np.arange(N + 1), 1))
    out[0] = -np.inf
    return out


def cycle_type_prob(model: WeightModel, ctype: CycleType, h=None) -> float:
    """P_Theta of the set of permutations with the given cycle type."""
    n = ctype.n
    la = _logh(model, n, h)
    _require_positive(la[n], n)
    th = theta_array(model, n)
    logp = -la[n]
    for m, c in ctype.counts:
        if th[m] == 0.0:
            return 0.0
        logp += c * (math.log(th[m]) - math.log(m)) - math.lgamma(c + 1)
    return math.exp(logp)


def enumerate_cycle_types(n: int):
    """All cycle types of S_n (integer partitions of n)."""
    for p in partitions(n):
        yield CycleType.from_dict(p)


def brute_force_hn(model: WeightModel, n: int) -> float:
    """h_n by summing prod (theta_m/m)^{c_m}/c_m! over every partition of n."""
    if n > BRUTE_FORCE_MAX_N:
        raise UsageError(f"partition enumeration limited to n <= {BRUTE_FORCE_MAX_N}")
    if n == 0:
        return 1.0
    th = theta_array(model, n)
    total = 0.0
    for p in partitions(n):
        term = 1.0
        for m, c in p.items():
            term *= (th[m] / m) ** c / math.factorial(c)
        total += term
    return total


def l1_distribution(model: WeightModel, n: int, h=None) -> DistributionTable:
    """Law of L_1, the length of the cycle containing element 1:
    ``P[L_1 = m] = theta_m h_{n-m} / (n h_n)``.
    """
    la = _logh(model, n, h)
    _require_positive(la[n], n)
    th = theta_array(model, n)
    m = np.arange(1, n + 1)
    with np.errstate(divide="ignore"):
        logp = np.log(th[1:]) + la[n - m] - math.log(n) - la[n]
    probs = np.exp(logp)
    return DistributionTable(m.tolist(), probs, meta={"n": n})


def joint_counts_distribution(model: WeightModel, n: int, b: int, cap=None, h=None) -> DistributionTable:
    """Exact joint law of (C_1, ..., C_b).

    ``P[C = a] = prod_{m<=b} (theta_m/m)^{a_m}/a_m! * hhat_{n - sum m a_m} / h_n``
    with ``hhat`` the coefficients of exp(g) with lengths 1..b removed.

    Each a_m runs up to ``min(n // m, cap_m)``; the default cap is generous
    relative to the Poisson(theta_m/m) scale. Outcomes below 1e-15 are
    dropped and all omitted mass is reported in ``deficit``.
    """
    if not 1 <= b <= n:
        raise UsageError(f"need 1 <= b <= n, got b={b}, n={n}")
    la = _logh(model, n, h)
    _require_positive(la[n], n)
    lhat = log_h_sequence(model, n, excluded=range(1, b + 1)).logabs
    lw = _log_theta_over_m(model, b)

    # states: rows of counts, accumulated log weight, used size
    states = np.zeros((1, 0), dtype=np.int64)
    logw = np.zeros(1)
    used = np.zeros(1, dtype=np.int64)
    for m in range(1, b + 1):
        if np.isneginf(lw[m]):
            amax = 0
        else:
            lam = math.exp(lw[m])
            amax = n // m
            default_cap = int(math.ceil(lam + 20 * math.sqrt(lam) + 40))
            amax = min(amax, default_cap if cap is None else int(cap))
        a = np.arange(amax + 1)
        la_m = a * lw[m] - gammaln(a + 1) if amax else np.zeros(1)
        new_used = used[:, None] + m * a[None, :]
        ok = new_used <= n
        rows, cols = np.nonzero(ok)
        states = np.hstack([states[rows], a[cols][:, None]])
        logw = logw[rows] + la_m[cols]
        used = new_used[rows, cols]
    logp = logw + lhat[n - used] - la[n]
    probs = np.exp(logp)
    keep = probs >= JOINT_PRUNE
    kept = probs[keep]
    deficit = max(0.0, 1.0 - math.fsum(kept))
    support = [tuple(int(x) for x in row) for row in states[keep]]
    return DistributionTable(support, kept, deficit=deficit, meta={"n": n, "b": b})


def cycle_count_means(model: WeightModel, n: int, h=None) -> np.ndarray:
    """E[C_m] = (theta_m/m) h_{n-m}/h_n for m = 0..n (index 0 unused, zero)."""
    la = _logh(model, n, h)
    _require_positive(la[n], n)
    lw = _log_theta_over_m(model, n)
    m = np.arange(n + 1)
    out = np.exp(lw + la[n - m] - la[n])
    out[0] = 0.0
    return out


def k0n_moments(model: WeightModel, n: int, h=None) -> tuple[float, float]:
    """Exact mean and variance of the total number of cycles K_0n.

    Uses the factorial moments ``E[C_m C_l] = a_m a_l h_{n-m-l}/h_n`` for
    m != l and ``E[C_m(C_m-1)] = a_m^2 h_{n-2m}/h_n`` with a_m = theta_m/m.
    """
    la = _logh(model, n, h)
    _require_positive(la[n], n)
    a = np.exp(_log_theta_over_m(model, n))
    a[0] = 0.0
    ratio = np.exp(la[: n + 1][::-1] - la[n])  # ratio[s] = h_{n-s}/h_n
    mean = float(np.dot(a, ratio))
    # sum over ordered pairs (m, l), including m == l, of a_m a_l h_{n-m-l}/h_n
    conv = np.convolve(a, a)[: n + 1]
    second_fact = float(np.dot(conv, ratio))
    var = second_fact + mean - mean * mean
    return mean, var


def k0n_distribution(model: WeightModel, n: int, h=None, jmax=None) -> DistributionTable:
    """Law of the number of cycles K_0n.

    Built from ``P_n[K = j] = sum_m P_n[L_1 = m] P_{n-m}[K = j-1]``, which is
    the bivariate recurrence ``n h_{n,j} = sum_m theta_m h_{n-m,j-1}`` divided
    through by h_n. The table is dense in j up to ``jmax`` (default: n for
    n <= 64, otherwise mean + 15 sd + 20 from :func:`k0n_moments`); mass
    beyond ``jmax`` goes to ``deficit``.
    """
    la = _logh(model, n, h)
    _require_positive(la[n], n)
    if jmax is None:
        if n <= 64:
            jmax = n
        else:
            mu, var = k0n_moments(model, n, h=_as_logspace(la[: n + 1]))
            jmax = min(n, int(mu + 15 * math.sqrt(max(var, 1.0)) + 20))
    jmax = int(jmax)
    th = theta_array(model, n)
    with np.errstate(divide="ignore"):
        logth = np.log(th)
    q = np.zeros((n + 1, jmax + 1))
    q[0, 0] = 1.0
    for size in range(1, n + 1):
        if not np.isfinite(la[size]):
            continue  # unreachable size
        w = np.exp(logth[1 : size + 1] + la[size - 1 :: -1] - math.log(size) - la[size])
        # q[size, j] = sum_m w_m q[size-m, j-1]
        q[size, 1:] = w @ q[size - 1 :: -1, :jmax]
    probs = q[n]
    deficit = max(0.0, 1.0 - math.fsum(probs))
    return DistributionTable(list(range(jmax + 1)), probs, deficit=deficit, meta={"n": n})


