"""Singular polynomial, saddle-point equation and asymptotic coefficient formulas.

For log-power weights the weight generating function behaves near t = 1 as

    g(e^{-w}) = P(-log w) + O(w),   P(r) = r^{k+1}/(k+1) + sum_{j<=k} c_j r^j,

and the coefficients of exp(v g(t)) are governed by the root r of
v P'(r) = n e^{-r}.

Two independent routes produce the c_j: :func:`estimate_cj` fits partial
sums of g, :func:`laurent_cj` expands the Mellin transform
``(-1)^j zeta^{(j)}(s+1) Gamma(s)`` at s = 0 with Stieltjes constants.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import mpmath
import numpy as np

from ._errors import DomainError, NumericalError, UsageError
from .weights import WeightKind, WeightModel, theta_array

__all__ = [
    "SingularPolynomial",
    "SaddlePoint",
    "LogValue",
    "laurent_cj",
    "estimate_cj",
    "default_w_grid",
    "singular_polynomial",
    "solve_saddle",
    "saddle_initial_guess",
    "hn_asymptotic",
    "coeff_asympt_regular_prefactor",
    "coeff_asympt_singular_prefactor",
]

SOLVER_TOL = 1e-12
FIT_MAX_COND = 1e10
#: powers w^1..w^3 absorb the regular part of g(e^{-w}) in the fit
FIT_POWER_TERMS = 3


@dataclass(frozen=True)
class SingularPolynomial:
    """P(r) = r^{k+1}/(k+1) + sum_{j=0}^k c[j] r^j."""

    k: int
    c: tuple[float, ...]
    fit_residual: float | None = field(default=None, compare=False)
    fit_condition: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.k < 1:
            raise DomainError("the singular polynomial needs k >= 1")
        if len(self.c) != self.k + 1:
            raise UsageError(f"expected {self.k + 1} coefficients c_0..c_k, got {len(self.c)}")
        object.__setattr__(self, "c", tuple(float(x) for x in self.c))

    @property
    def coeffs(self) -> np.ndarray:
        """Ascending coefficients including the fixed leading term."""
        return np.array(list(self.c) + [1.0 / (self.k + 1)])

    def _eval(self, coeffs, r):
        return np.polynomial.polynomial.polyval(r, coeffs)

    def __call__(self, r):
        return self._eval(self.coeffs, r)

    def d1(self, r):
        return self._eval(np.polynomial.polynomial.polyder(self.coeffs), r)

    def d2(self, r):
        return self._eval(np.polynomial.polynomial.polyder(self.coeffs, 2), r)

    @functools.cached_property
    def r_min(self) -> float:
        """Largest real root of P' (-inf if none); P' > 0 to its right."""
        roots = np.polynomial.polynomial.polyroots(np.polynomial.polynomial.polyder(self.coeffs))
        real = [z.real for z in np.atleast_1d(roots) if abs(z.imag) < 1e-9]
        return max(real) if real else -math.inf


@dataclass(frozen=True)
class SaddlePoint:
    r: float
    n: float
    v: float
    P_r: float
    dP_r: float
    ddP_r: float
    n_exp: float  # n e^{-r}
    iterations: int = 0

    @property
    def relative_residual(self) -> float:
        """|v P'(r) e^r / n - 1|."""
        return abs(math.expm1(math.log(self.v * self.dP_r) + self.r - math.log(self.n)))


class LogValue(NamedTuple):
    """A real number stored as sign and log of its magnitude."""

    sign: int
    logabs: float

    @property
    def value(self) -> float:
        try:
            return self.sign * math.exp(self.logabs)
        except OverflowError:
            return self.sign * math.inf


# --- the coefficients c_j ---------------------------------------------------


def laurent_cj(k: int, lower_coeffs=(), dps: int = 30) -> tuple[float, ...]:
    """c_0..c_k from the Laurent expansion at s = 0 of the Mellin transform of g(e^{-w}).

    For theta_m = sum_j a_j log^j m (a_k = 1) the transform is
    ``sum_j a_j (-1)^j zeta^{(j)}(s+1) Gamma(s)``. With
    ``zeta(s+1) = 1/s + sum_q (-1)^q gamma_q s^q/q!`` and
    ``Gamma(s) = sum_p G_p s^{p-1}`` (G_p the Taylor coefficients of
    Gamma(1+s)), the coefficient of s^e, -k-2 <= e <= -1, is
    ``sum_j a_j (j! G_{e+j+2} + [e = -1] gamma_j)`` and c_q = f_{-1-q}/q!.
    """
    if k < 1:
        raise DomainError("k >= 1 required")
    a = [float(x) for x in lower_coeffs] + [0.0] * (k - len(lower_coeffs))
    a = a[:k] + [1.0]
    with mpmath.workdps(dps):
        G = mpmath.taylor(mpmath.gamma, 1, k + 2)
        f = {}
        for e in range(-k - 2, 0):
            tot = mpmath.mpf(0)
            for j, aj in enumerate(a):
                if aj == 0:
                    continue
                if e + j + 2 >= 0:
                    tot += aj * math.factorial(j) * G[e + j + 2]
                if e == -1:
                    tot += aj * mpmath.stieltjes(j)
            f[e] = tot
        return tuple(float(f[-1 - q] / math.factorial(q)) for q in range(k + 1))


def default_w_grid(points: int = 12, w_max: float = 1e-2, w_min: float = 1e-4) -> np.ndarray:
    return np.geomspace(w_max, w_min, points)


def estimate_cj(model: WeightModel, w_grid=None, N_trunc: int | None = None) -> SingularPolynomial:
    """Least-squares fit of the c_j from partial sums of g(e^{-w}).

    With L = -log w the fit is

        g(e^{-w}) - L^{k+1}/(k+1) ~ sum_{j<=k} c_j L^j + sum_{i=1..3} e_i w^i

    where the w^i columns absorb the regular remainder (it is a power series
    in w). ``N_trunc`` defaults to 45/min(w), which leaves a series tail far
    below 1e-14; an explicit value is checked against the same bound.
    """
    if model.kind is not WeightKind.LOG_POWER:
        raise DomainError("the singular expansion needs log-power weights with k >= 1")
    k = model.k
    w = np.asarray(default_w_grid() if w_grid is None else w_grid, dtype=float)
    if w.size < k + 2:
        raise UsageError(f"need at least k+2 = {k + 2} grid points")
    if np.any(w <= 0) or np.any(w > 0.05):
        raise DomainError("grid values must lie in (0, 0.05]")
    wmin = float(w.min())
    if N_trunc is None:
        N_trunc = int(math.ceil(45.0 / wmin))
    th = theta_array(model, N_trunc + 1)
    tail = th[N_trunc] / N_trunc * math.exp(-wmin * (N_trunc + 1)) / -math.expm1(-wmin)
    if not (tail < 1e-14 and th[N_trunc + 1] / (N_trunc + 1) <= th[N_trunc] / N_trunc):
        raise NumericalError(f"N_trunc={N_trunc} leaves a tail of {tail:.3g} at w={wmin:.3g}; increase N_trunc")

    m = np.arange(1, N_trunc + 1, dtype=float)
    coef = th[1 : N_trunc + 1] / m
    gvals = np.array([math.fsum(coef * np.exp(-wi * m)) for wi in w])

    L = -np.log(w)
    y = gvals - L ** (k + 1) / (k + 1)
    cols = [L**j for j in range(k + 1)] + [w**i for i in range(1, FIT_POWER_TERMS + 1)]
    A = np.column_stack(cols)
    if A.shape[1] > A.shape[0]:
        raise UsageError(f"need at least {A.shape[1]} grid points for the fit")
    scale = np.linalg.norm(A, axis=0)
    As = A / scale
    cond = float(np.linalg.cond(As))
    if cond > FIT_MAX_COND:
        raise NumericalError(f"fit condition number {cond:.3g} > 1e10; widen the w grid")
    sol, *_ = np.linalg.lstsq(As, y, rcond=None)
    sol = sol / scale
    resid = float(np.max(np.abs(A @ sol - y)))
    return SingularPolynomial(k, tuple(sol[: k + 1]), fit_residual=resid, fit_condition=cond)


@functools.lru_cache(maxsize=64)
def singular_polynomial(model: WeightModel) -> SingularPolynomial:
    """Fitted singular polynomial for a log-power model (cached)."""
    return estimate_cj(model)


# --- saddle point ---------------------------------------------------------------


def saddle_initial_guess(k: int, n: float, v: float = 1.0) -> float:
    """log(n/v) - k log log(n/v)."""
    x = math.log(n / v)
    return x - k * math.log(x) if x > 1 else x


def solve_saddle(P: SingularPolynomial, n: float, v: float = 1.0) -> SaddlePoint:
    """Root of v P'(r) = n e^{-r} nearest the first-order asymptotic guess.

    Solves phi(r) = log(v P'(r)) + r - log n = 0 on r > r_min (where P' > 0)
    by Newton steps safeguarded with bisection inside a sign-change bracket
    grown outward from the initial guess.
    """
    if not (n > 0 and v > 0):
        raise DomainError("need n > 0 and v > 0")
    logn = math.log(n)
    logv = math.log(v)
    rmin = P.r_min

    def phi(r):
        return logv + math.log(P.d1(r)) + r - logn

    def dphi(r):
        return P.d2(r) / P.d1(r) + 1.0

    r0 = saddle_initial_guess(P.k, n, v)
    if r0 <= rmin:
        r0 = rmin + 1.0
    f0 = phi(r0)
    if f0 == 0:
        lo = hi = r0
    elif f0 < 0:
        lo, step = r0, 0.5
        for _ in range(200):
            hi = lo + step
            if phi(hi) > 0:
                break
            lo, step = hi, step * 2
        else:
            raise NumericalError(f"no saddle bracket above r={r0:.6g} for n={n}")
    else:
        hi, step = r0, 0.5
        for _ in range(200):
            lo = hi - step
            if lo <= rmin:
                lo = rmin + 0.5 * (hi - rmin)
            if phi(lo) < 0:
                break
            hi, step = lo, step * 2
        else:
            raise NumericalError(f"no saddle bracket below r={r0:.6g} for n={n}; n too small for the saddle regime")

    r = min(max(r0, lo), hi)
    its = 0
    while hi - lo > 4e-16 * max(1.0, abs(r)):
        its += 1
        if its > 200:
            raise NumericalError(f"saddle solver did not converge for n={n}, v={v}")
        f = phi(r)
        if abs(f) <= SOLVER_TOL * 1e-2:
            break
        if f < 0:
            lo = r
        else:
            hi = r
        d = dphi(r)
        rn = r - f / d if d > 0 else 0.5 * (lo + hi)
        if not lo < rn < hi:
            rn = 0.5 * (lo + hi)
        r = rn
    r = float(r)
    sp = SaddlePoint(
        r=r, n=float(n), v=float(v), P_r=float(P(r)), dP_r=float(P.d1(r)),
        ddP_r=float(P.d2(r)), n_exp=float(n * math.exp(-r)), iterations=its,
    )
    if sp.relative_residual > 1e-10:
        raise NumericalError(f"saddle residual {sp.relative_residual:.3g} exceeds 1e-10")
    return sp


# --- coefficient asymptotics --------------------------------------------------------


def _log_main_term(sp: SaddlePoint) -> float:
    b = sp.v * sp.ddP_r + sp.n_exp
    if not b > 0:
        raise NumericalError(f"v P''(r) + n e^(-r) = {b:.3g} is not positive at r={sp.r:.6g}")
    return float(sp.v * sp.P_r + sp.n_exp - sp.r - 0.5 * math.log(2 * math.pi * b))


def hn_asymptotic(P: SingularPolynomial, n: float, v: float = 1.0) -> LogValue:
    """Saddle-point estimate of [t^n] exp(v g(t)):

        exp(v P(r) + n e^{-r}) / (e^r sqrt(2 pi (v P''(r) + n e^{-r})))

    The relative error is O(log^{-k/2} n) and is not corrected for.
    """
    return LogValue(1, _log_main_term(solve_saddle(P, n, v)))


def coeff_asympt_regular_prefactor(P: SingularPolynomial, n: float, v: float, f1: float) -> LogValue:
    """[t^n] f(t) exp(v g(t)) for f analytic beyond the unit disc: f(1) times :func:`hn_asymptotic`."""
    if f1 == 0:
        raise DomainError("f(1) must be nonzero")
    base = hn_asymptotic(P, n, v)
    return LogValue(1 if f1 > 0 else -1, base.logabs + math.log(abs(f1)))


def coeff_asympt_singular_prefactor(P: SingularPolynomial, n: float, c_f: float, j: int, kf: int) -> LogValue:
    """[t^n] f(t) exp(g(t)) when f(e^{-w}) ~ c_f (-log w)^kf / w^j as w -> 0.

    Evaluates f at the saddle, ``c_f r^kf e^{j r}``, times the v = 1 main term.
    """
    if j < 0:
        raise DomainError("j must be >= 0")
    if c_f == 0:
        raise DomainError("c_f must be nonzero")
    sp = solve_saddle(P, n, 1.0)
    if kf and sp.r <= 0:
        raise NumericalError("saddle r <= 0: prefactor r^kf undefined in log space")
    log_pref = math.log(abs(c_f)) + (kf * math.log(sp.r) if kf else 0.0) + j * sp.r
    return LogValue(1 if c_f > 0 else -1, log_pref + _log_main_term(sp))
