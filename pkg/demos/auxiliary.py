"""Auxiliary functions with a high-order zero, and why they force a contradiction.

Run: python3 demos/auxiliary.py
"""
from fractions import Fraction

import mpmath

from tpmahler import aux_series, build_aux, decay_experiment, gen_diff_recurrence, height_ledger, ledger_sweep

p, P = 2, 3
tab = gen_diff_recurrence(p, 80)
s = build_aux(p, P, tab)
print(f"P={P}: nullspace dimension {s.nullity}, vanishing order {s.achieved_vanishing}")
for j, row in enumerate(s.d):
    terms = " + ".join(f"{c}*z^{l}" for l, c in enumerate(row) if c) or "0"
    print(f"  a_{j}(z) = {terms}")

E = aux_series(s, tab, 16)
print("Taylor coefficients of E:", [str(c) for c in E.coeffs[:14]])

# |E(alpha^(2^k))| shrinks like |alpha|^(9 * 2^k).  The raw exponent
# log|E| / log|x| carries the constant C, so it approaches 9 from below;
# dividing out C measured at k = 0 isolates the exponent.
rep = decay_experiment(s, Fraction(1, 2), 5)
print("\n k   log|E|         raw exponent   C-normalised")
for r in rep.rows:
    print(f"{r.k:2d}  {mpmath.nstr(r.log_abs, 10):>14}  {mpmath.nstr(r.decay_exponent, 6):>12}"
          f"  {mpmath.nstr(r.calibrated_exponent, 6):>12}")

# Heights: the arithmetic floor falls like -c2 P p^k, the analytic value
# like -P^2 p^k log 2.  One power of P more wins once P log 2 > c2.
led = height_ledger(p, Fraction(1, 2), P, 4, scheme=s)
print(f"\nC0={led.C0:.3f}  C1={led.C1:.3f}  c2={led.c2:.3f}  crossover P*={led.crossover_P}")
print(led.to_csv())

sw = ledger_sweep(p, Fraction(1, 2), range(2, 9), tab=tab)
for P_, r in sw.ratios().items():
    print(f"P={P_}  analytic/arithmetic = {r:.5f}")
print("slope error", round(sw.slope_error(), 4), " crossover", sw.crossover_P)
