"""Young-diagram profiles, limit-shape quantities and Monte Carlo checks.

The profile of a cycle type is w_n(y) = sum_{m >= y} C_m, the number of
cycles of length at least y. Under the scaling n* = n/r^k horizontally and
n_bar = r^k vertically (r the v = 1 saddle point) the rescaled profile
w_n(x n*)/n_bar approaches w_inf(x) = E_1(x).

Besides sampling-based reports this module computes exact finite-n means
and covariances of profile values from the factorial moments
E[C_m C_l] = a_m a_l h_{n-m-l}/h_n (m != l), E[C_m(C_m-1)] = a_m^2 h_{n-2m}/h_n,
a_m = theta_m/m. These serve as oracles for the fluctuation checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from scipy.stats import kstest, poisson

from ._errors import DomainError, UsageError
from .asympt import singular_polynomial, solve_saddle
from .exact import CycleType, joint_counts_distribution, k0n_moments, l1_distribution, log_h_sequence
from .sampler import LengthSamples, make_sampler, sample_lengths
from .series import LogSpaceSeries
from .weights import WeightModel, theta_array

__all__ = [
    "Scaling",
    "ShapeCurve",
    "FluctuationReport",
    "K0nReport",
    "L1Report",
    "ProfileMoments",
    "shape_scaling",
    "young_profile",
    "profile_matrix",
    "w_infinity",
    "sigma_infinity2",
    "increment_cov_theory",
    "sigma_conditioned2",
    "increment_cov_conditioned",
    "exact_profile_moments",
    "fluctuation_reports",
    "increment_cov_empirical",
    "k0n_clt_check",
    "l1_scaling_check",
    "poisson_limit_tv",
    "ALLOWANCE_C",
]

EULER_GAMMA = 0.57721566490153286061
#: constant C of the C/log n allowance for the unknown O(1/log n) shift
ALLOWANCE_C = 5.0


# --- scaling and profiles -------------------------------------------------------


@dataclass(frozen=True)
class Scaling:
    """Horizontal scale n_star = n/r^k and vertical scale n_bar = r^k."""

    n: int
    r: float
    k: int
    n_star: float
    n_bar: float

    def __post_init__(self):
        if not math.isclose(self.n_star * self.n_bar, self.n, rel_tol=1e-9):
            raise UsageError("scaling must satisfy n_star * n_bar = n")


def shape_scaling(model: WeightModel, n: int) -> Scaling:
    """Scaling from the v = 1 saddle point of the model's singular polynomial."""
    P = singular_polynomial(model)
    r = float(solve_saddle(P, n, 1.0).r)
    n_bar = r**model.k
    return Scaling(int(n), r, model.k, n / n_bar, n_bar)


@dataclass(frozen=True)
class ShapeCurve:
    xs: np.ndarray
    values: np.ndarray
    scaling: Scaling

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if xs.shape != vals.shape:
            raise UsageError("xs and values differ in shape")
        if np.any(np.diff(vals) > 1e-12):
            raise UsageError("profile values must be nonincreasing in x")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", vals)


def _check_grid(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise UsageError("xs must be a nonempty 1-d grid")
    if np.any(xs <= 0) or np.any(np.diff(xs) <= 0):
        raise UsageError("xs must be positive and strictly increasing")
    return xs


def _thresholds(xs, scaling: Scaling) -> np.ndarray:
    """Smallest integer length m with m >= x n_star, for each x."""
    return np.ceil(np.asarray(xs, dtype=float) * scaling.n_star - 1e-9).astype(np.int64)


def young_profile(ctype: CycleType, xs, scaling: Scaling) -> ShapeCurve:
    """(1/n_bar) * #{cycles of length >= x n_star} at every x."""
    xs = _check_grid(xs)
    lengths = np.asarray(ctype.lengths(), dtype=float)
    vals = np.array([(lengths >= x * scaling.n_star - 1e-9 * max(1.0, x * scaling.n_star)).sum() for x in xs])
    return ShapeCurve(xs, vals / scaling.n_bar, scaling)


def profile_matrix(samples: LengthSamples, xs, scaling: Scaling) -> np.ndarray:
    """Unscaled profile counts w_n(x n_star), one row per sample."""
    xs = _check_grid(xs)
    return samples.count_at_least(_thresholds(xs, scaling))


# --- limit shape ------------------------------------------------------------------


def _e1_series(x: float) -> float:
    # E_1(x) = -gamma - log x - sum_{j>=1} (-x)^j / (j j!)
    total = 0.0
    term = 1.0
    j = 1
    while True:
        term *= -x / j
        add = term / j
        total += add
        if abs(add) < 1e-17 * max(1.0, abs(total)):
            break
        j += 1
    return -EULER_GAMMA - math.log(x) - total


def _e1_cfrac(x: float) -> float:
    # modified Lentz on E_1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for i in range(1, 10_000):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return f * math.exp(-x)


def _e1(x: float) -> float:
    if not x > 0:
        raise DomainError(f"w_infinity needs x > 0, got {x}")
    if math.isinf(x):
        return 0.0
    return _e1_series(x) if x <= 1.0 else _e1_cfrac(x)


def w_infinity(x):
    """Limit shape E_1(x) = int_x^inf e^{-u}/u du (scalar or array)."""
    if np.ndim(x) == 0:
        return _e1(float(x))
    return np.array([_e1(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))


def sigma_infinity2(x):
    """e^{-2x} + w_infinity(x)."""
    if np.ndim(x) == 0:
        return math.exp(-2.0 * x) + _e1(float(x))
    return np.exp(-2.0 * np.asarray(x, dtype=float)) + w_infinity(x)


def _check_increments(x_j, x_j1, x_i, x_i1):
    if not (0 <= x_j <= x_j1 and 0 <= x_i <= x_i1):
        raise DomainError(f"increment endpoints must satisfy 0 <= lo <= hi, got {(x_j, x_j1, x_i, x_i1)}")
    if not (x_j1 <= x_i or x_i1 <= x_j):
        raise DomainError(f"increments [{x_j}, {x_j1}) and [{x_i}, {x_i1}) overlap")


def increment_cov_theory(x_j: float, x_j1: float, x_i: float, x_i1: float) -> float:
    """(e^{-x_j} - e^{-x_j1}) (e^{-x_i} - e^{-x_i1}) for increments [x_j, x_j1), [x_i, x_i1).

    Each pair must be ordered and the two intervals must not overlap; they
    may come in either order, so swapping the pairs gives the same value.
    Leading term only; the relative O(1/r) correction is not added.
    """
    _check_increments(x_j, x_j1, x_i, x_i1)
    return (math.exp(-x_j) - math.exp(-x_j1)) * (math.exp(-x_i) - math.exp(-x_i1))


def sigma_conditioned2(x):
    """w_infinity(x) - e^{-2x}: Poisson variance minus the part removed by fixing sum m C_m = n.

    This is the limit the exact finite-n variances of :func:`exact_profile_moments`
    approach; it differs from :func:`sigma_infinity2` in the sign of e^{-2x}.
    """
    if np.ndim(x) == 0:
        return _e1(float(x)) - math.exp(-2.0 * x)
    return w_infinity(x) - np.exp(-2.0 * np.asarray(x, dtype=float))


def increment_cov_conditioned(x_j: float, x_j1: float, x_i: float, x_i1: float) -> float:
    """Minus :func:`increment_cov_theory`; the sign matching the exact finite-n covariances."""
    return -increment_cov_theory(x_j, x_j1, x_i, x_i1)


# --- exact profile moments ----------------------------------------------------------


@dataclass(frozen=True)
class ProfileMoments:
    """Exact mean vector and covariance matrix of cycle counts over length bands."""

    bands: tuple[tuple[int, int], ...]
    mean: np.ndarray
    cov: np.ndarray


def _h_ratio(model, n, h):
    if h is None:
        h = log_h_sequence(model, n)
    la = h.logabs if isinstance(h, LogSpaceSeries) else np.log(np.asarray(h, dtype=float))
    if not np.isfinite(la[n]):
        raise DomainError(f"h_{n} = 0: the measure is undefined on S_{n}")
    return np.exp(la[: n + 1][::-1] - la[n])  # ratio[s] = h_{n-s}/h_n


def exact_profile_moments(model: WeightModel, n: int, bands, h=None) -> ProfileMoments:
    """Mean and covariance of N_B = sum_{m in B} C_m for bands B = [lo, hi) of lengths.

    Cov(N_A, N_B) = sum_s (a_A * a_B)[s] h_{n-s}/h_n + E N_{A&B} - E N_A E N_B,
    with a_A = theta_m/m restricted to A and * the Cauchy product.
    """
    bands = tuple((int(lo), int(hi)) for lo, hi in bands)
    ratio = _h_ratio(model, n, h)
    th = theta_array(model, n)
    a = np.zeros(n + 1)
    a[1:] = th[1:] / np.arange(1, n + 1)
    idx = np.arange(n + 1)
    masks = [(idx >= max(lo, 1)) & (idx < hi) for lo, hi in bands]
    vecs = [np.where(mk, a, 0.0) for mk in masks]
    mean = np.array([float(v @ ratio) for v in vecs])
    B = len(bands)
    cov = np.zeros((B, B))
    for i in range(B):
        for j in range(i, B):
            second = float(np.clip(fftconvolve(vecs[i], vecs[j])[: n + 1], 0.0, None) @ ratio)
            overlap = float(np.where(masks[i] & masks[j], a, 0.0) @ ratio)
            c = second + overlap - mean[i] * mean[j]
            cov[i, j] = cov[j, i] = c
    return ProfileMoments(bands, mean, cov)


# --- fluctuation reports ----------------------------------------------------------------


@dataclass(frozen=True)
class FluctuationReport:
    """Rescaled-profile statistics at one point x.

    ``mean_shift`` is mean(w_n(x n*))/n_bar - w_inf(x); ``variance_emp`` is
    Var(w_n(x n*))/n_bar; ``z_n_allowance`` is ALLOWANCE_C/log n.
    ``variance_exact`` is the finite-n variance from exact moments, when computed.
    """

    x: float
    mean_shift: float
    variance_emp: float
    variance_theory: float
    z_n_allowance: float
    variance_conditioned: float = math.nan
    variance_exact: float | None = None


def fluctuation_reports(samples: LengthSamples, xs, scaling: Scaling, model: WeightModel | None = None, h=None):
    """One :class:`FluctuationReport` per x; exact variances when ``model`` is given."""
    xs = _check_grid(xs)
    W = profile_matrix(samples, xs, scaling)
    exact = None
    if model is not None:
        th = _thresholds(xs, scaling)
        exact = exact_profile_moments(model, scaling.n, [(t, scaling.n + 1) for t in th], h=h)
    out = []
    for j, x in enumerate(xs):
        col = W[:, j]
        out.append(
            FluctuationReport(
                x=float(x),
                mean_shift=float(col.mean() / scaling.n_bar - w_infinity(x)),
                variance_emp=float(col.var(ddof=1) / scaling.n_bar),
                variance_theory=float(math.exp(-2 * x) + w_infinity(x)),
                z_n_allowance=ALLOWANCE_C / math.log(scaling.n),
                variance_conditioned=float(sigma_conditioned2(x)),
                variance_exact=None if exact is None else float(exact.cov[j, j] / scaling.n_bar),
            )
        )
    return out


def increment_cov_empirical(samples: LengthSamples, scaling: Scaling, x_j, x_j1, x_i, x_i1, model=None, h=None) -> dict:
    """Covariance of the two profile increments, divided by n_bar.

    Returns the sample covariance and, with ``model``, the version centered at
    the exact finite-n means together with the exact covariance itself.
    """
    _check_increments(x_j, x_j1, x_i, x_i1)
    n = scaling.n
    lo_j, hi_j, lo_i, hi_i = (
        n + 1 if math.isinf(x) else int(_thresholds([x], scaling)[0]) for x in (x_j, x_j1, x_i, x_i1)
    )
    starts = np.array([lo_j, hi_j, lo_i, hi_i])
    C = samples.count_at_least(np.maximum(starts, 1))
    A = C[:, 0] - C[:, 1]
    B = C[:, 2] - C[:, 3]
    out = {"cov_sample_centered": float(np.cov(A, B, ddof=1)[0, 1] / scaling.n_bar)}
    if model is not None:
        pm = exact_profile_moments(model, n, [(lo_j, hi_j), (lo_i, hi_i)], h=h)
        out["cov_exact_centered"] = float(np.mean((A - pm.mean[0]) * (B - pm.mean[1])) / scaling.n_bar)
        out["cov_exact"] = float(pm.cov[0, 1] / scaling.n_bar)
    out["cov_theory"] = increment_cov_theory(x_j, x_j1, x_i, x_i1)
    out["cov_conditioned"] = -out["cov_theory"]
    return out


# --- K_0n and L_1 ---------------------------------------------------------------------


@dataclass(frozen=True)
class K0nReport:
    n: int
    samples: int
    mean_emp: float
    mean_exact: float
    var_exact: float
    var_asymptotic: float
    ks_stat: float


def k0n_clt_check(model: WeightModel, n: int, samples: int, seed: int = 0, workers: int = 1, h=None) -> K0nReport:
    """KS distance of (K_0n - E K_0n)/sqrt(log^{k+1}(n)/(k+1)) to N(0, 1).

    The mean is exact; the variance is the asymptotic log^{k+1}(n)/(k+1).
    """
    if samples < 1:
        raise UsageError("samples must be >= 1")
    if h is None:
        h = log_h_sequence(model, n)
    mean_exact, var_exact = k0n_moments(model, n, h=h)
    state = make_sampler(model, n, seed=seed, h=h)
    K = sample_lengths(state, samples, workers=workers).num_cycles.astype(float)
    var_asym = math.log(n) ** (model.k + 1) / (model.k + 1)
    z = (K - mean_exact) / math.sqrt(var_asym)
    ks = float(kstest(z, "norm").statistic)
    return K0nReport(n, samples, float(K.mean()), mean_exact, var_exact, var_asym, ks)


@dataclass(frozen=True)
class L1Report:
    n: int
    samples: int
    r: float
    mean_of_L1_rk_over_n: float
    mean_exact_rk_over_n: float
    ks_vs_exp1: float


def l1_scaling_check(model: WeightModel, n: int, samples: int, seed: int = 0, workers: int = 1, h=None) -> L1Report:
    """Law of L_1 r^k / n against Exp(1): empirical mean, exact mean, KS distance."""
    if samples < 1:
        raise UsageError("samples must be >= 1")
    if h is None:
        h = log_h_sequence(model, n)
    sc = shape_scaling(model, n)
    state = make_sampler(model, n, seed=seed, h=h)
    L1 = sample_lengths(state, samples, workers=workers).lexicographic(1).astype(float)
    y = L1 / sc.n_star
    exact_mean = l1_distribution(model, n, h=h).mean() / sc.n_star
    ks = float(kstest(y, "expon").statistic)
    return L1Report(n, samples, sc.r, float(y.mean()), float(exact_mean), ks)


def poisson_limit_tv(model: WeightModel, n: int, lengths=(2, 3), h=None) -> float:
    """Exact TV distance between the joint law of (C_m)_{m in lengths} and independent Poissons."""
    lengths = tuple(sorted(set(int(m) for m in lengths)))
    if not lengths or lengths[0] < 1 or lengths[-1] > n:
        raise UsageError("lengths must lie in 1..n")
    b = lengths[-1]
    joint = joint_counts_distribution(model, n, b, h=h)
    acc: dict[tuple, float] = {}
    for a, p in zip(joint.support, joint.probs):
        key = tuple(a[m - 1] for m in lengths)
        acc[key] = acc.get(key, 0.0) + p
    th = theta_array(model, b)
    lam = np.array([th[m] / m for m in lengths])
    diff = 0.0
    poisson_seen = 0.0
    for key, p in acc.items():
        q = float(np.prod(poisson.pmf(key, lam)))
        poisson_seen += q
        diff += abs(p - q)
    # outcomes absent from the table carry only Poisson mass (plus the table's own deficit)
    diff += max(0.0, 1.0 - poisson_seen) + joint.deficit
    return 0.5 * diff
