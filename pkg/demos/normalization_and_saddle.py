"""Exact normalization constants against their saddle-point approximation.

Prints the fitted singular polynomial for theta_m = log m, then the exact
log h_n next to the saddle-point value for n = 2^8 .. 2^14.

    python3 demos/normalization_and_saddle.py
"""
import math

from logcycles.asympt import estimate_cj, hn_asymptotic, laurent_cj, solve_saddle
from logcycles.exact import log_h_sequence
from logcycles.weights import log_power


def main():
    model = log_power(1)
    fit = estimate_cj(model)
    print("c_j (fit)     ", ", ".join(f"{c:+.8f}" for c in fit.c))
    print("c_j (Laurent) ", ", ".join(f"{c:+.8f}" for c in laurent_cj(1)))

    N = 2**14
    la = log_h_sequence(model, N).logabs
    print(f"\n{'n':>6} {'r':>8} {'log h exact':>12} {'log h saddle':>13} {'ratio':>8}")
    for e in range(8, 15):
        n = 2**e
        sp = solve_saddle(fit, n)
        approx = hn_asymptotic(fit, n).logabs
        print(f"{n:>6} {sp.r:8.4f} {la[n]:12.5f} {approx:13.5f} {math.exp(approx - la[n]):8.5f}")


if __name__ == "__main__":
    main()
