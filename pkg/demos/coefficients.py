"""Taylor coefficients of T_p and their arithmetic.

Run: python3 demos/coefficients.py
"""
from tpmahler import (
    check_functional_equation,
    gen_cauchy_recurrence,
    gen_diff_recurrence,
    gen_log_exp,
    nu_p,
)

# The three generators share nothing beyond the definition of T_p,
# so agreement between them is a strong check.
p, N = 3, 30
tabs = [g(p, N) for g in (gen_log_exp, gen_cauchy_recurrence, gen_diff_recurrence)]
print("generators agree:", tabs[0].t == tabs[1].t == tabs[2].t)

tab = tabs[2]
for n in range(0, N + 1, p):
    print(f"t_{p}({n:2d}) = {str(tab.t[n]):>14}")

# Only multiples of p appear, and every denominator is a power of p.
print(check_functional_equation(tab).summary())

# How negative does the p-adic valuation get?  Compare with -nu_p(n).
tab2 = gen_diff_recurrence(2, 64)
print("\n  n  nu_2(t_2(n))  -nu_2(n)")
for n, v in enumerate(tab2.valuations()):
    if v is not None and n and n % 8 == 0:
        print(f"{n:3d}  {v:12d}  {-nu_p(2, n):8d}")

# The valuation falls roughly like -n, far below -nu_p(n).
x = tab2.t[64]
print("\nt_2(64) =", x, " denominator 2^", x.denominator.bit_length() - 1)
assert x.denominator == 2 ** (x.denominator.bit_length() - 1)
assert x.numerator % 2 == 1
