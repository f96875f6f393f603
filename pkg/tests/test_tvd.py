import math
import warnings

import numpy as np
import pytest
from scipy.stats import poisson

from logcycles import DomainError, UsageError
from logcycles.exact import joint_counts_distribution
from logcycles.tvd import DIRECT_MAX_B, DIRECT_MAX_N, dtv_direct, dtv_via_formula, t_pmf, threshold_c
from logcycles.weights import constant, custom, log_power


def test_t_pmf_examples():
    zero = t_pmf(custom([1.0, 0.0, 0.0, 0.0]), 1, 4, 10)
    assert zero.pmf.prob(0) == pytest.approx(1.0, rel=1e-15)
    t = t_pmf(log_power(1), 1, 2, 6)
    assert t.pmf.prob(0) == pytest.approx(2**-0.5, rel=1e-14)
    assert t.pmf.prob(2) == pytest.approx(2**-0.5 * math.log(2) / 2, rel=1e-14)
    assert t.pmf.prob(2) == pytest.approx(0.245065, abs=1e-6)
    assert all(t.pmf.prob(l) == 0 for l in (1, 3, 5))
    n = 20
    u = t_pmf(constant(1.0), 0, n, n)
    H = math.fsum(1.0 / m for m in range(1, n + 1))
    assert u.pmf.prob(n) == pytest.approx(math.exp(-H), rel=1e-12)


def test_t_pmf_matches_poisson_sum():
    # T_{0,2} = Y_1 + 2 Y_2 under constant weights 1.5
    c = 1.5
    t = t_pmf(constant(c), 0, 2, 12)
    for l in range(13):
        ref = sum(poisson.pmf(l - 2 * y2, c) * poisson.pmf(y2, c / 2) for y2 in range(l // 2 + 1))
        assert t.pmf.prob(l) == pytest.approx(ref, rel=1e-12, abs=1e-300)
    assert t.tail_mass == pytest.approx(1 - sum(t.pmf.probs), abs=1e-15)


def test_t_pmf_argument_checks():
    with pytest.raises(UsageError):
        t_pmf(log_power(1), 3, 3, 5)
    with pytest.raises(UsageError):
        t_pmf(log_power(1), 0, 3, -1)


def test_dtv_examples():
    assert dtv_via_formula(log_power(1), 3, 2) == pytest.approx(1 - 2**-0.5, abs=1e-12)
    assert dtv_via_formula(log_power(1), 500, 1) == pytest.approx(0.0, abs=1e-14)
    assert dtv_direct(log_power(1), 3, 2) == pytest.approx(1 - 2**-0.5, abs=1e-12)


def test_dtv_uniform_b1_by_hand():
    # fixed points of uniform S_4: 9, 8, 6, 0, 1 permutations with 0..4 fixed points
    counts = [9, 8, 6, 0, 1]
    p = np.array(counts) / 24
    q = poisson.pmf(np.arange(5), 1.0)
    ref = 0.5 * (np.abs(p - q).sum() + (1 - q.sum()))
    assert dtv_direct(constant(1.0), 4, 1) == pytest.approx(ref, abs=1e-14)
    assert dtv_via_formula(constant(1.0), 4, 1) == pytest.approx(ref, abs=1e-12)


def test_dtv_uniform_matches_joint_table():
    model = constant(1.0)
    n, b = 8, 3
    joint = joint_counts_distribution(model, n, b)
    lam = np.array([1.0, 0.5, 1 / 3])
    diff, seen = 0.0, 0.0
    for a, pr in zip(joint.support, joint.probs):
        q = float(np.prod(poisson.pmf(a, lam)))
        seen += q
        diff += abs(pr - q)
    ref = 0.5 * (diff + 1 - seen)
    assert dtv_via_formula(model, n, b) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("model", [log_power(1), log_power(2), constant(1.0)], ids=lambda m: str(m.describe()))
def test_dtv_two_routes_agree(model):
    worst = 0.0
    for n in range(2, DIRECT_MAX_N + 1):
        for b in range(1, min(n, DIRECT_MAX_B) + 1):
            a, d = dtv_via_formula(model, n, b), dtv_direct(model, n, b)
            assert 0.0 <= a <= 1.0
            worst = max(worst, abs(a - d))
    assert worst <= 1e-9


def test_dtv_zero_when_all_small_weights_vanish():
    seq = [0.0, 0.0, 0.0] + [1.0] * 20
    model = custom(seq)
    assert dtv_direct(model, 10, 3) == pytest.approx(0.0, abs=1e-15)
    assert dtv_via_formula(model, 10, 3) == pytest.approx(0.0, abs=1e-15)


def test_dtv_errors():
    with pytest.raises(UsageError):
        dtv_via_formula(log_power(1), 5, 6)
    with pytest.raises(UsageError):
        dtv_direct(log_power(1), DIRECT_MAX_N + 1, 2)
    with pytest.raises(DomainError):
        dtv_via_formula(constant(0.0), 5, 2)


def test_threshold_c():
    assert threshold_c(1) == pytest.approx(6**-0.5, rel=1e-15)
    assert threshold_c(1) == pytest.approx(0.408248, abs=1e-6)
    assert threshold_c(2) == pytest.approx(0.480750, abs=1e-6)
    vals = [threshold_c(k) for k in range(1, 60)]
    assert all(a < b for a, b in zip(vals, vals[1:])) and vals[-1] < 1
    with pytest.raises(DomainError):
        threshold_c(0)


def test_dtv_decreasing_in_n_soft():
    model = log_power(1)
    for b in (2, 3, 5):
        d = [dtv_via_formula(model, 2**e, b) for e in (8, 10, 12, 14)]
        if any(y > x for x, y in zip(d, d[1:])):
            warnings.warn(f"d_{b}(n) not monotone over n = 2^8..2^14: {d}")
        assert d[-1] < d[0]
