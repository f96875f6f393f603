"""Total variation distance between small cycle counts and independent Poissons.

Let Y_m ~ Poisson(theta_m/m) be independent and T_{b1,b2} = sum_{b1<m<=b2} m Y_m.
The cycle counts are the Y's conditioned on T_{0n} = n, which yields

    d_b(n) = sum_l P[T_{0b} = l] (1 - P[T_{bn} = n-l] / P[T_{0n} = n])_+ .

For l > n the ratio vanishes, so those terms add up to P[T_{0b} > n] and the
whole sum is evaluated exactly from coefficient tables up to n.
:func:`dtv_direct` computes the same distance from the definition, using
partition enumeration, as an independent route.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from ._errors import DomainError, UsageError
from .exact import DistributionTable, enumerate_cycle_types, log_h_sequence
from .series import exp_recurrence
from .weights import WeightModel, theta_array

__all__ = ["PoissonWeightedSum", "t_pmf", "dtv_via_formula", "dtv_direct", "threshold_c", "DIRECT_MAX_N", "DIRECT_MAX_B"]

DIRECT_MAX_N = 16
DIRECT_MAX_B = 5


@dataclass
class PoissonWeightedSum:
    """Law of T_{b1,b2} on 0..lmax; ``pmf.deficit`` is P[T > lmax]."""

    b1: int
    b2: int
    pmf: DistributionTable

    @property
    def tail_mass(self) -> float:
        return self.pmf.deficit


def _log_pmf_T(model, b1, b2, lmax):
    """log P[T_{b1,b2} = l] for l = 0..lmax (-inf where the mass is zero)."""
    th = theta_array(model, b2)
    m = np.arange(b1 + 1, b2 + 1)
    mass = math.fsum(th[m] / m)
    # exponent sum_{b1<m<=b2} theta_m z^m / m, truncated at z^lmax
    expo = np.zeros(lmax + 1)
    top = min(b2, lmax)
    if top > b1:
        expo[b1 + 1 : top + 1] = th[b1 + 1 : top + 1]
    _, la = exp_recurrence(expo, log_output=True)
    return la - mass


def t_pmf(model: WeightModel, b1: int, b2: int, lmax: int) -> PoissonWeightedSum:
    """Probabilities P[T_{b1,b2} = l], l = 0..lmax."""
    if not 0 <= b1 < b2:
        raise UsageError(f"need 0 <= b1 < b2, got {b1}, {b2}")
    if lmax < 0:
        raise UsageError("lmax must be >= 0")
    probs = np.exp(_log_pmf_T(model, b1, b2, lmax))
    deficit = max(0.0, 1.0 - math.fsum(probs))
    return PoissonWeightedSum(b1, b2, DistributionTable(list(range(lmax + 1)), probs, deficit=deficit))


def dtv_via_formula(model: WeightModel, n: int, b: int) -> float:
    """d_b(n) from the conditioning relation (exact, no truncation)."""
    if not 1 <= b <= n:
        raise UsageError(f"need 1 <= b <= n, got b={b}, n={n}")
    th = theta_array(model, n)
    logh = log_h_sequence(model, n).logabs
    if not np.isfinite(logh[n]):
        raise DomainError(f"P[T_0n = n] = 0 for n={n}: degenerate model")
    mass_b = math.fsum(th[1 : b + 1] / np.arange(1, b + 1))
    lhat = log_h_sequence(model, n, excluded=range(1, b + 1)).logabs
    p_T0b = np.exp(_log_pmf_T(model, 0, b, n))  # l = 0..n
    # P[T_bn = n-l] / P[T_0n = n] = exp(mass_b) hhat_{n-l} / h_n
    ratio = np.exp(mass_b + lhat[::-1] - logh[n])
    central = math.fsum(p_T0b * np.clip(1.0 - ratio, 0.0, None))
    tail = max(0.0, 1.0 - math.fsum(p_T0b))  # P[T_0b > n], where the ratio is 0
    return min(1.0, central + tail)


def dtv_direct(model: WeightModel, n: int, b: int) -> float:
    """d_b(n) from its definition: half the l1 distance of the two laws.

    The law of (C_1..C_b) comes from enumerating every cycle type of S_n.
    Both laws are compared on the box {a : sum_m m a_m <= n}, which holds all
    of the cycle-count mass; the Poisson mass outside it enters in full.
    """
    if n > DIRECT_MAX_N or b > DIRECT_MAX_B:
        raise UsageError(f"direct enumeration limited to n <= {DIRECT_MAX_N}, b <= {DIRECT_MAX_B}")
    if not 1 <= b <= n:
        raise UsageError(f"need 1 <= b <= n, got b={b}, n={n}")
    th = theta_array(model, n)

    # law of C under P_Theta by enumeration: weight prod (theta_m/m)^c / c!
    weights: dict[tuple, float] = {}
    total = 0.0
    for ct in enumerate_cycle_types(n):
        d = ct.as_dict()
        w = 1.0
        for m, c in d.items():
            w *= (th[m] / m) ** c / math.factorial(c)
        if w == 0.0:
            continue
        key = tuple(d.get(m, 0) for m in range(1, b + 1))
        weights[key] = weights.get(key, 0.0) + w
        total += w
    if total == 0.0:
        raise DomainError(f"h_{n} = 0: the measure is undefined on S_{n}")

    lam = th[1 : b + 1] / np.arange(1, b + 1)
    diff = 0.0
    poisson_in_box = 0.0
    for a in itertools.product(*(range(n // m + 1) for m in range(1, b + 1))):
        if sum((i + 1) * x for i, x in enumerate(a)) > n:
            continue
        py = float(np.prod(poisson.pmf(a, lam)))
        pc = weights.get(a, 0.0) / total
        poisson_in_box += py
        diff += abs(pc - py)
    return 0.5 * (diff + max(0.0, 1.0 - poisson_in_box))


def threshold_c(k: int) -> float:
    """Exponent bound (3k+3)^{-1/(k+1)}: d_b(n) -> 0 whenever b = o(n^c) with c below it."""
    if k < 1:
        raise DomainError("k >= 1 required")
    return (3 * k + 3) ** (-1.0 / (k + 1))
