import math

import numpy as np
import pytest
from scipy.special import lambertw

from logcycles import DomainError, NumericalError, UsageError
from logcycles.asympt import (
    LogValue,
    SingularPolynomial,
    coeff_asympt_regular_prefactor,
    coeff_asympt_singular_prefactor,
    default_w_grid,
    estimate_cj,
    hn_asymptotic,
    laurent_cj,
    saddle_initial_guess,
    singular_polynomial,
    solve_saddle,
)
from logcycles.exact import l1_distribution, log_h_sequence
from logcycles.weights import constant, log_power

# Laurent-product oracle values, computed with 30-digit Stieltjes constants
ORACLE = {
    1: (0.916240149844, -0.577215664902),
    2: (-1.82464851535, 1.97811199066, -0.577215664902),
    3: (5.89242235543, -5.44487445649, 2.96716798598, -0.577215664902),
}


def test_laurent_oracle_frozen_values():
    for k, ref in ORACLE.items():
        assert np.allclose(laurent_cj(k), ref, rtol=0, atol=5e-12)


def test_laurent_oracle_is_precision_stable():
    assert np.allclose(laurent_cj(2, dps=30), laurent_cj(2, dps=60), rtol=0, atol=1e-15)


def test_c1_is_minus_euler_gamma_and_c0_closed_form():
    g = 0.5772156649015329
    gamma1 = -0.07281584548367672
    c0, c1 = laurent_cj(1)
    assert c1 == pytest.approx(-g, abs=1e-15)
    assert c0 == pytest.approx(g * g / 2 + math.pi**2 / 12 + gamma1, abs=1e-14)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_fit_agrees_with_oracle(k):
    P = estimate_cj(log_power(k))
    assert np.allclose(P.c, laurent_cj(k), rtol=0, atol=1e-4)
    assert P.fit_condition < 1e10 and P.fit_residual < 1e-10


@pytest.mark.parametrize("coeffs", [(1.0,), (0.5, 2.0), (0.3, 0.0, 1.5)])
def test_fit_agrees_with_oracle_lower_terms(coeffs):
    k = len(coeffs)
    assert np.allclose(estimate_cj(log_power(k, coeffs)).c, laurent_cj(k, coeffs), rtol=0, atol=1e-4)


def test_adding_a0_shifts_c1_by_one():
    base = estimate_cj(log_power(1))
    shifted = estimate_cj(log_power(1, [1.0]))
    assert shifted.c[1] - base.c[1] == pytest.approx(1.0, abs=1e-8)
    assert shifted.c[0] == pytest.approx(base.c[0], abs=1e-8)


def test_fit_rejects_non_log_models_and_bad_grids():
    with pytest.raises(DomainError):
        estimate_cj(constant(1.0))
    with pytest.raises(DomainError):
        log_power(0)
    with pytest.raises(DomainError):
        estimate_cj(log_power(1), w_grid=[0.1, 0.01, 0.001, 0.0001])
    with pytest.raises(UsageError):
        estimate_cj(log_power(3), w_grid=[0.01, 0.001, 0.0001])
    with pytest.raises(NumericalError):
        estimate_cj(log_power(1), N_trunc=1000)


def test_fit_reports_ill_conditioning():
    w = np.geomspace(1e-2, 1.05e-2, 12)
    with pytest.raises(NumericalError, match="condition"):
        estimate_cj(log_power(2), w_grid=w)


def test_default_grid():
    w = default_w_grid()
    assert w.size == 12 and w[0] == pytest.approx(1e-2) and w[-1] == pytest.approx(1e-4)


# --- singular polynomial and saddle ----------------------------------------------------------


def test_polynomial_derivatives():
    P = SingularPolynomial(2, (1.0, -2.0, 0.5))
    r = 1.7
    assert P(r) == pytest.approx(r**3 / 3 + 0.5 * r * r - 2 * r + 1)
    assert P.d1(r) == pytest.approx(r * r + r - 2)
    assert P.d2(r) == pytest.approx(2 * r + 1)
    assert P.r_min == pytest.approx(1.0)
    with pytest.raises(UsageError):
        SingularPolynomial(2, (1.0,))


@pytest.mark.parametrize("n", [100.0, math.e, 1e6, 1e12])
def test_saddle_lambert_oracle(n):
    P = SingularPolynomial(1, (0.0, 0.0))  # P(r) = r^2/2, so r e^r = n
    sp = solve_saddle(P, n)
    assert sp.r == pytest.approx(float(lambertw(n).real), rel=1e-12)
    assert sp.relative_residual <= 1e-10


def test_saddle_examples():
    P = SingularPolynomial(1, (0.0, 0.0))
    assert solve_saddle(P, 100).r == pytest.approx(3.385630, abs=1e-6)
    assert solve_saddle(P, math.e).r == pytest.approx(1.0, abs=1e-12)
    Pk1 = singular_polynomial(log_power(1))
    n = 1e6
    assert abs(solve_saddle(Pk1, n).r - (math.log(n) - math.log(math.log(n)))) < 2


def test_saddle_grid_residual_and_initializer():
    for k in (1, 2):
        P = singular_polynomial(log_power(k))
        for e in range(8, 21):
            for v in (1.0, 2.0, 4.0):
                sp = solve_saddle(P, 2.0**e, v)
                assert sp.relative_residual <= 1e-10
                assert abs(v * sp.dP_r - sp.n_exp) <= 1e-10 * sp.n_exp
                assert abs(sp.r - saddle_initial_guess(k, 2.0**e, v)) < 3
                assert sp.r > 0


def test_n_exp_tracks_log_power():
    sp = solve_saddle(singular_polynomial(log_power(1)), 2.0**20)
    assert sp.n_exp / math.log(2.0**20) == pytest.approx(1.0, rel=0.35)


def test_n_exp_over_log_power_converges_slowly_for_k2():
    # n e^{-r} = P'(r) ~ r^k and r = log n - k log log n + O(1), so the ratio to
    # log^k n approaches 1 only at rate log log n / log n
    P = singular_polynomial(log_power(2))
    q = [solve_saddle(P, 2.0**e).n_exp / math.log(2.0**e) ** 2 for e in (20, 40, 80, 200)]
    assert q == sorted(q) and q[0] < 0.65 and q[-1] > 0.85
    for e in (20, 40, 80):
        sp = solve_saddle(P, 2.0**e)
        assert sp.n_exp / sp.r**2 == pytest.approx(1.0, rel=0.1)


def test_saddle_domain_errors():
    P = singular_polynomial(log_power(1))
    with pytest.raises(DomainError):
        solve_saddle(P, -5)
    with pytest.raises(DomainError):
        solve_saddle(P, 100, v=0)


def test_saddle_root_nearest_initializer_when_not_unique():
    # P'(r) = r^2 - 3r + 2.2 is positive everywhere but dips; the root on the
    # asymptotic branch is returned and satisfies the equation
    P = SingularPolynomial(2, (0.0, 2.2, -1.5))
    sp = solve_saddle(P, 5e4)
    assert sp.relative_residual <= 1e-10
    assert abs(sp.r - saddle_initial_guess(2, 5e4)) < 3


# --- coefficient asymptotics ---------------------------------------------------------------


def _ratio(P, model, n):
    la = log_h_sequence(model, n).logabs
    return math.exp(hn_asymptotic(P, n).logabs - la[n])


@pytest.mark.parametrize("k,top", [(1, 14), (2, 13)])
def test_hn_asymptotic_ratio(k, top):
    model = log_power(k)
    P = singular_polynomial(model)
    la = log_h_sequence(model, 2**top).logabs
    ratios = [math.exp(hn_asymptotic(P, 2**e).logabs - la[2**e]) for e in range(8, top + 1, 2 if k == 1 else 1)]
    assert all(0.5 <= q <= 2.0 for q in ratios)
    assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)


def test_hn_asymptotic_deterministic_in_v():
    P = singular_polynomial(log_power(1))
    assert hn_asymptotic(P, 1000, 1) == hn_asymptotic(P, 1000, 1.0)
    assert isinstance(hn_asymptotic(P, 1000), LogValue)


def test_regular_prefactor_against_exact():
    model = log_power(1)
    P = singular_polynomial(model)
    n = 2**12
    la = log_h_sequence(model, n).logabs
    base = _ratio(P, model, n)
    # f = 1 + t: [t^n] f e^g = h_n + h_{n-1}
    exact = np.logaddexp(la[n], la[n - 1])
    ratio = math.exp(coeff_asympt_regular_prefactor(P, n, 1.0, 2.0).logabs - exact)
    assert ratio == pytest.approx(base, rel=0.01)
    # f = e^t: [t^n] f e^g = sum_j h_{n-j}/j!
    exact = np.logaddexp.reduce([la[n - j] - math.lgamma(j + 1) for j in range(60)])
    ratio = math.exp(coeff_asympt_regular_prefactor(P, n, 1.0, math.e).logabs - exact)
    assert ratio == pytest.approx(base, rel=0.01)
    assert coeff_asympt_regular_prefactor(P, n, 1.0, 1.0) == hn_asymptotic(P, n)
    neg = coeff_asympt_regular_prefactor(P, n, 1.0, -3.0)
    assert neg.sign == -1 and neg.value == pytest.approx(-3 * hn_asymptotic(P, n).value)
    with pytest.raises(DomainError):
        coeff_asympt_regular_prefactor(P, n, 1.0, 0.0)


def test_singular_prefactor_against_exact():
    model = log_power(1)
    P = singular_polynomial(model)
    n = 2**12
    la = log_h_sequence(model, n + 1).logabs
    assert coeff_asympt_singular_prefactor(P, n, 1.0, 0, 0) == hn_asymptotic(P, n, 1.0)
    # f = g'(t): f(e^{-w}) ~ (-log w)/w, and [t^n] g' e^g = (n+1) h_{n+1}
    est = coeff_asympt_singular_prefactor(P, n, 1.0, 1, 1)
    assert math.exp(est.logabs - math.log(n + 1) - la[n + 1]) == pytest.approx(1.0, abs=0.2)
    with pytest.raises(DomainError):
        coeff_asympt_singular_prefactor(P, n, 1.0, -1, 0)


@pytest.mark.parametrize("k", [1, 2])
def test_l1_mean_order_of_magnitude(k):
    # E[L_1 - 1] = [t^{n-1}] t g''(t) e^{g(t)} / (n h_n); t g'' has c_f = 1, j = 2, kf = k
    model = log_power(k)
    P = singular_polynomial(model)
    n = 2**13
    la = log_h_sequence(model, n).logabs
    exact = l1_distribution(model, n).mean() - 1
    est = math.exp(coeff_asympt_singular_prefactor(P, n - 1, 1.0, 2, k).logabs - la[n]) / n
    assert 0.3 <= exact / est <= 3
