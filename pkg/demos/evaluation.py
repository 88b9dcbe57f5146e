"""Certified values of T_p inside the unit disk.

Run: python3 demos/evaluation.py
"""
from fractions import Fraction

import mpmath

from tpmahler import (
    Method,
    boundary_probe,
    evaluate,
    iterate_functional_check,
    iterate_identity_check,
)

mpmath.mp.dps = 30

# Three routes to T_2(9/10); the first two carry proven error radii.
for m in Method:
    rep = evaluate(2, "9/10", m, prec=256)
    print(f"{m.value:10s} {mpmath.nstr(rep.value.real, 25)}  +/- {mpmath.nstr(rep.value.rad, 3)}"
          f"  rigorous={rep.rigorous}")

# Complex points work the same way.
rep = evaluate(3, (Fraction(1, 2), Fraction(-1, 3)), Method.PRODUCT)
print("\nT_3(1/2 - i/3) =", mpmath.nstr(rep.value.mid, 20))

# Stepping the functional equation along alpha, alpha^2, alpha^4, ...
print("\nk  residual of T(a^(2^k)) = T(a^(2^(k-1)))^2 (1 - a^(2^k))")
for row in iterate_functional_check(2, "1/2", 4):
    print(row.k, mpmath.nstr(row.residual, 3), row.ok)

# Unrolled, the same equation says T(a^(p^k))^(1/p^k) = T(a) prod (1 - a^(p^i))^(1/p^i).
# Without the root on the left the two sides differ visibly.
for form in ("root", "stated"):
    rows = iterate_identity_check(2, "1/2", 3, form=form)
    print(f"{form:7s}", [mpmath.nstr(r.residual, 3) for r in rows])

# Toward the boundary: log T_2(r) grows like log 1/(1-r).
radii = [Fraction(k, 10) for k in range(1, 10)] + [Fraction(99, 100), Fraction(999, 1000)]
for j in (1, 2):
    tab = boundary_probe(2, j, radii)
    print(f"\nray toward exp(2 pi i / 2^{j})")
    for row in tab.rows[-4:]:
        print(f"r={float(row.r):6.3f}  log T(r)={mpmath.nstr(row.log_real.real, 8):>12}"
              f"  log|T(r zeta)|={mpmath.nstr(row.log_ray.real, 8):>12}")
