"""Small cycle counts: exact law against independent Poisson variables.

For theta_m = log m the counts (C_1, ..., C_b) approach independent
Poisson(theta_m / m). The distance is computed exactly, two ways.

    python3 demos/small_cycles.py
"""
from logcycles.observables import poisson_limit_tv
from logcycles.tvd import dtv_direct, dtv_via_formula
from logcycles.weights import log_power


def main():
    model = log_power(1)
    print("d_b(n), two exact routes")
    for n, b in ((8, 2), (12, 3), (16, 4)):
        print(f"  n={n:>2} b={b}  formula {dtv_via_formula(model, n, b):.12f}  direct {dtv_direct(model, n, b):.12f}")

    print("\n(C_2, C_3) vs Poisson product")
    for e in (8, 10, 12, 14):
        print(f"  n=2^{e:<2}  TV {poisson_limit_tv(model, 2**e, (2, 3)):.6f}")


if __name__ == "__main__":
    main()
