import json
import math
from fractions import Fraction

import mpmath
import pytest

from tpmahler.auxiliary import (
    AuxScheme,
    SchemeError,
    aux_series,
    build_aux,
    build_aux_bivariate,
    counting_ok,
    decay_experiment,
    height_ledger,
    ledger_sweep,
    regularity_check,
    verify_bivariate_vanishing,
    verify_vanishing,
)
from tpmahler.coeffs import gen_cauchy_recurrence, gen_diff_recurrence, gen_log_exp


@pytest.fixture(scope="module")
def tab2():
    return gen_diff_recurrence(2, 120)


@pytest.fixture(scope="module")
def scheme3(tab2):
    return build_aux(2, 3, tab2)


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("P", [2, 3, 4, 5])
def test_vanishing_and_nullity(p, P):
    tab = gen_diff_recurrence(p, P * P + P)
    s = build_aux(p, P, tab)
    assert s.nullity >= 2 * P + 1
    assert s.nullity + s.rank == (P + 1) ** 2
    # independent substitution with a table from another generator
    other = gen_log_exp(p, P * P + P)
    first = verify_vanishing(s, other, P * P + P)
    assert first is None or first >= P * P
    assert s.achieved_vanishing >= P * P


def test_small_scheme_is_pinned(tab2):
    s = build_aux(2, 2, tab2)
    # z^2 - z^2 T: vanishes to order 4 since T = 1 + z^2/2 + ...
    assert s.d == ((0, 0, 1), (0, 0, -1), (0, 0, 0))
    assert s.achieved_vanishing == 4
    E = aux_series(s, tab2, 10)
    assert E.first_nonzero() == 4 and E[4] == Fraction(-1, 2)


def test_scheme_is_deterministic(tab2):
    a = build_aux(2, 4, tab2)
    b = build_aux(2, 4, gen_cauchy_recurrence(2, 20))
    assert a.d == b.d
    assert math.gcd(*[x for row in a.d for x in row]) == 1


def test_scheme_preconditions(tab2):
    with pytest.raises(ValueError):
        build_aux(2, 1, tab2)
    with pytest.raises(ValueError):
        build_aux(2, 4, gen_diff_recurrence(2, 10))
    with pytest.raises(ValueError):
        build_aux(3, 2, tab2)
    with pytest.raises(ValueError):
        AuxScheme(2, 2, ((0, 0, 0),) * 3, 0)


def test_fault_injected_scheme_fails_vanishing(scheme3, tab2):
    d = [list(r) for r in scheme3.d]
    j, l = next((j, l) for j in range(4) for l in range(4) if d[j][l])
    d[j][l] += 1
    broken = AuxScheme(2, 3, tuple(map(tuple, d)), 0)
    assert verify_vanishing(broken, tab2, 20) < 9


def test_scheme_json_round_trip(scheme3):
    doc = json.loads(json.dumps(scheme3.to_json()))
    assert set(doc) == {"p", "P", "d", "achieved_vanishing"}
    assert AuxScheme.from_json(doc).d == scheme3.d


def test_decay_rows_and_csv(scheme3):
    rep = decay_experiment(scheme3, "1/2", 4)
    assert [r.k for r in rep.rows] == [0, 1, 2, 3, 4]
    assert all(r.determinate for r in rep.rows)
    assert rep.to_csv().splitlines()[0] == "k,log_abs,decay_exponent"
    ex = rep.exponents()
    assert all(a < b for a, b in zip(ex, ex[1:]))
    assert ex[-1] < 9


def test_decay_is_stable_under_precision(scheme3):
    a = decay_experiment(scheme3, "1/2", 3, prec=256)
    b = decay_experiment(scheme3, "1/2", 3, prec=512)
    for x, y in zip(a.rows, b.rows):
        assert abs(x.decay_exponent - y.decay_exponent) < mpmath.mpf(10) ** -60


def test_decay_against_taylor_expansion(scheme3, tab2):
    # E(x) = sum_n b_n x^n with b_n = 0 for n < 9; compare at x = 1/16
    E = aux_series(scheme3, tab2, 120)
    x = Fraction(1, 16)
    rep = decay_experiment(scheme3, Fraction(1, 4), 1)
    with mpmath.workprec(300):
        partial = sum(mpmath.mpf(c.numerator) / c.denominator * (mpmath.mpf(x.numerator) / x.denominator) ** n
                      for n, c in enumerate(E) if c)
        # Taylor tail beyond z^120 at 1/16 is far below the radius
        assert rep.rows[1].value.contains(partial)
        assert rep.rows[1].value.rad < mpmath.mpf(10) ** -80


def test_decay_normalised_by_fitted_constant(scheme3):
    rep = decay_experiment(scheme3, "1/2", 4)
    assert rep.cauchy_bound_holds()
    assert rep.calibrated_satisfies(0.5)
    assert rep.rows[0].calibrated_exponent == 9
    assert rep.rows[-1].calibrated_exponent < 9.05


def test_decay_p2_smallest_scheme_meets_tolerance(tab2):
    rep = decay_experiment(build_aux(2, 2, tab2), "1/2", 4)
    assert rep.satisfies(0.5)


def test_scaling_shifts_log_by_a_constant(scheme3):
    a = decay_experiment(scheme3, "1/2", 4)
    b = decay_experiment(scheme3.scaled(-7), "1/2", 4)
    with mpmath.workprec(256):
        shifts = [y.log_abs - x.log_abs for x, y in zip(a.rows, b.rows)]
        assert all(abs(s - mpmath.log(7)) < mpmath.mpf(10) ** -50 for s in shifts)
        for x, y in zip(a.rows, b.rows):
            assert abs(x.calibrated_exponent - y.calibrated_exponent) < mpmath.mpf(10) ** -50


def test_ledger_columns(tab2):
    led = height_ledger(2, "1/2", 3, 5, tab=tab2)
    for r in led.rows:
        assert r.h_alpha_pk == pytest.approx(2**r.k * math.log(2), rel=1e-12)
        assert r.analytic == pytest.approx(-9 * 2**r.k * math.log(2), rel=1e-12)
        assert r.c1_chain <= led.c2 * 3 * 2**r.k * (1 + 1e-12)
    assert led.to_csv().splitlines()[0] == "k,analytic,arithmetic"
    # crossover P* is the least P with P log 2 > c2
    assert (led.crossover_P - 1) * math.log(2) <= led.c2 < led.crossover_P * math.log(2)


def test_ledger_rejects_bad_alpha():
    with pytest.raises(ValueError):
        height_ledger(2, "3/2", 3, 3)
    with pytest.raises(TypeError):
        height_ledger(2, 0.5, 3, 3)


def test_ledger_sweep_linear_in_P(tab2):
    sw = ledger_sweep(2, "1/2", range(2, 9), tab=tab2)
    assert sw.slope_error() < 0.05
    slope, _ = sw.least_squares_slope()
    assert slope > 0
    assert math.isfinite(sw.crossover_P) and sw.crossover_P > 8
    r = sw.ratios()
    assert all(r[P] < r[P + 1] for P in range(2, 8))


@pytest.mark.parametrize("P,unknowns,conditions", [(2, 54, 15), (4, 375, 153)])
def test_bivariate_counts(P, unknowns, conditions):
    ok, u, c = counting_ok(P)
    assert ok and (u, c) == (unknowns, conditions)


@pytest.mark.parametrize("P", [2, 3, 4])
def test_bivariate_vanishing(P):
    N = P * P + P
    a = gen_diff_recurrence(2, N)
    b = gen_cauchy_recurrence(2, N)
    s = build_aux_bivariate(2, P, a)
    assert s.nullity >= s.unknowns - s.conditions
    assert verify_bivariate_vanishing(s, b, a, P * P) is None
    assert all(l1 + l2 <= P for (_, _, l1, l2) in s.d)


def test_bivariate_fault_injection():
    a = gen_diff_recurrence(2, 6)
    s = build_aux_bivariate(2, 2, a)
    key = next(iter(s.d))
    d = dict(s.d)
    d[key] += 1
    broken = type(s)(s.p, s.P, d, s.nullity, s.rank, s.unknowns, s.conditions)
    assert verify_bivariate_vanishing(broken, a, a, 4) is not None


def test_bivariate_rejects_m3():
    with pytest.raises(ValueError):
        build_aux_bivariate(2, 2, gen_diff_recurrence(2, 6), m=3)


def test_regularity():
    rep = regularity_check(2, "1/2", 10)
    assert rep.passed
    assert all(d == 1 - Fraction(1, 2 ** (2 ** (k + 1))) for k, d in enumerate(rep.denominators))
    assert regularity_check(3, (Fraction(1, 2), Fraction(1, 2)), 5).passed
    with pytest.raises(ValueError):
        regularity_check(2, -1, 3)
