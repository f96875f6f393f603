"""Rescaled Young-diagram profiles and their fluctuations.

Samples permutations with theta_m = log^3 m at n = 2^16 and compares the
mean rescaled profile with E_1(x). The sample variance is printed next to
the exact finite-n variance and the two closed forms E_1 +- e^{-2x}. For
x <= 1 the data sit near the minus sign; further out finite-n corrections
dominate and only the exact column tracks the samples.

    python3 demos/limit_shape.py [samples]
"""
import sys

from logcycles.exact import log_h_sequence
from logcycles.observables import fluctuation_reports, shape_scaling, w_infinity
from logcycles.sampler import make_sampler, sample_lengths
from logcycles.weights import log_power


def main(samples=5000):
    model = log_power(3)
    n = 2**16
    h = log_h_sequence(model, n)
    sc = shape_scaling(model, n)
    print(f"n = {n}, r = {sc.r:.4f}, n* = {sc.n_star:.2f}, n_bar = {sc.n_bar:.2f}")
    s = sample_lengths(make_sampler(model, n, seed=3, h=h), samples)
    xs = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0]
    print(f"{'x':>5} {'mean':>8} {'E_1':>8} {'var':>8} {'exact':>8} {'E1+e':>8} {'E1-e':>8}")
    for rep in fluctuation_reports(s, xs, sc, model=model, h=h):
        mean = rep.mean_shift + w_infinity(rep.x)
        print(
            f"{rep.x:5.2f} {mean:8.4f} {w_infinity(rep.x):8.4f} {rep.variance_emp:8.4f} "
            f"{rep.variance_exact:8.4f} {rep.variance_theory:8.4f} {rep.variance_conditioned:8.4f}"
        )


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:2]))
