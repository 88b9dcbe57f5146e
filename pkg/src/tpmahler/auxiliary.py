"""Auxiliary functions E_P(z) = sum_j a_j(z) T_p(z)^j with high-order vanishing.

``build_aux`` solves the (P^2) x (P+1)^2 linear system that kills the
first P^2 Taylor coefficients of E_P, ``decay_experiment`` measures how
fast |E_P| collapses along ``alpha, alpha**p, alpha**(p**2), ...`` and
``height_ledger`` instantiates the height estimates for E_P at those
points with every constant made explicit, over Q.

The bivariate construction (``build_aux_bivariate``) mirrors the
univariate one with ``E_P(z1, z2) = sum a_{j1 j2}(z1, z2) T(z1)^j1 T(z2)^j2``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import mpmath
from mpmath import mpf

from .arith import rational_height, require_prime, to_rational
from .coeffs import CoeffTable
from .evaluate import GUARD_BITS, ApproxValue, Point, as_point, eval_product
from .linalg import max_bits, nullspace
from .series import TruncSeries, ps_mul, ps_pow

__all__ = [
    "SchemeError",
    "AuxScheme",
    "BivariateScheme",
    "build_aux",
    "verify_vanishing",
    "aux_series",
    "DecayRow",
    "DecayReport",
    "decay_experiment",
    "LedgerRow",
    "BoundLedger",
    "height_ledger",
    "LedgerSweep",
    "ledger_sweep",
    "counting_ok",
    "build_aux_bivariate",
    "verify_bivariate_vanishing",
    "RegularityReport",
    "regularity_check",
]


class SchemeError(RuntimeError):
    """Internal inconsistency, e.g. a vanishing system of full column rank."""


@dataclass(frozen=True)
class AuxScheme:
    p: int
    P: int
    d: tuple[tuple[int, ...], ...]  # d[j][l]: coefficient of z^l in a_j(z)
    achieved_vanishing: int
    nullity: int = 0
    rank: int = 0

    def __post_init__(self):
        if len(self.d) != self.P + 1 or any(len(r) != self.P + 1 for r in self.d):
            raise ValueError("d must be (P+1) x (P+1)")
        if not any(any(r) for r in self.d):
            raise ValueError("scheme is identically zero")

    def a_poly(self, j: int, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.d[j]):
            acc = acc * x + c
        return acc

    def scaled(self, c) -> AuxScheme:
        """Multiply every coefficient by the integer c (nonzero)."""
        c = int(c)
        if c == 0:
            raise ValueError("scale must be nonzero")
        d = tuple(tuple(c * x for x in row) for row in self.d)
        return AuxScheme(self.p, self.P, d, self.achieved_vanishing, self.nullity, self.rank)

    def max_coeff_height(self) -> float:
        return max(math.log(abs(x)) for row in self.d for x in row if x)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "P": self.P,
            "d": [list(r) for r in self.d],
            "achieved_vanishing": self.achieved_vanishing,
        }

    @classmethod
    def from_json(cls, doc) -> AuxScheme:
        if isinstance(doc, str):
            doc = json.loads(doc)
        d = tuple(tuple(int(x) for x in row) for row in doc["d"])
        return cls(int(doc["p"]), int(doc["P"]), d, int(doc["achieved_vanishing"]))


def _powers_by_multiplication(tab: CoeffTable, P: int, order: int) -> list[TruncSeries]:
    T = tab.series(order)
    out = [TruncSeries.one(order)]
    for _ in range(P):
        out.append(ps_mul(out[-1], T))
    return out


def _pick(basis):
    # smallest max bit size, ties broken by position in the basis
    return min(range(len(basis)), key=lambda i: (max_bits(basis[i]), i))


def build_aux(p: int, P: int, tab: CoeffTable) -> AuxScheme:
    """Integer d_{j,l} with ``sum_{j,l} d_{j,l} z^l T^j = O(z^(P^2))``."""
    require_prime(p)
    if tab.p != p:
        raise ValueError(f"table is for p={tab.p}, not {p}")
    if P < 2:
        raise ValueError("P must be >= 2")
    if tab.N < P * P + P:
        raise ValueError(f"table order {tab.N} < P^2 + P = {P * P + P}")
    nconds = P * P
    width = P + 1
    powers = _powers_by_multiplication(tab, P, nconds - 1)
    matrix = []
    for n in range(nconds):
        row = []
        for j in range(width):
            pj = powers[j]
            for l in range(width):
                row.append(pj[n - l] if n >= l else Fraction(0))
        matrix.append(row)
    ns = nullspace(matrix, width * width)
    if ns.dimension == 0:
        raise SchemeError("vanishing system has full column rank")
    vec = ns.basis[_pick(ns.basis)]
    d = tuple(tuple(vec[j * width + l] for l in range(width)) for j in range(width))
    provisional = AuxScheme(p, P, d, nconds, ns.dimension, ns.rank)
    first = verify_vanishing(provisional, tab, tab.N)
    achieved = tab.N + 1 if first is None else first
    if achieved < nconds:
        raise SchemeError(f"constructed scheme vanishes only to order {achieved} < {nconds}")
    return AuxScheme(p, P, d, achieved, ns.dimension, ns.rank)


def aux_series(s: AuxScheme, tab: CoeffTable, N: int) -> TruncSeries:
    """Taylor expansion of E_P through z^N, built with the series module."""
    if tab.N < N:
        raise ValueError(f"table order {tab.N} < {N}")
    T = tab.series(N)
    total = TruncSeries([0], N)
    for j in range(s.P + 1):
        a = TruncSeries(s.d[j], N)
        term = a if j == 0 else ps_mul(a, ps_pow(T, j))
        total = total + term
    return total


def verify_vanishing(s: AuxScheme, tab: CoeffTable, N: int) -> int | None:
    """Index of the first nonzero Taylor coefficient of E_P, or None if all vanish through N."""
    return aux_series(s, tab, N).first_nonzero()


# --------------------------------------------------------------------------
# decay along the orbit


@dataclass(frozen=True)
class DecayRow:
    k: int
    point_modulus: mpf
    value: ApproxValue
    log_abs: mpf | None
    decay_exponent: mpf | None
    calibrated_exponent: mpf | None = None  # (log|E_k| - log C) / (p^k log|alpha|)

    @property
    def determinate(self) -> bool:
        return self.log_abs is not None


@dataclass
class DecayReport:
    p: int
    P: int
    alpha: Fraction
    prec: int
    rows: list[DecayRow] = field(default_factory=list)
    log_C: mpf | None = None  # fitted so that |E(alpha)| = C |alpha|^(P^2)

    def exponents(self, kmin: int = 1) -> list[mpf | None]:
        return [r.decay_exponent for r in self.rows if r.k >= kmin]

    def satisfies(self, eps: float = 0.5) -> bool:
        """decay_exponent_k >= P^2 - eps for every k >= 1, all rows determinate."""
        ex = self.exponents(1)
        return bool(ex) and all(e is not None and e >= self.P * self.P - eps for e in ex)

    def calibrated_satisfies(self, eps: float = 0.5) -> bool:
        """Same test with the k = 0 constant C divided out."""
        ex = [r.calibrated_exponent for r in self.rows if r.k >= 1]
        return bool(ex) and all(e is not None and e >= self.P * self.P - eps for e in ex)

    def cauchy_bound_holds(self) -> bool:
        """log|E_k| <= log C - P^2 p^k log(1/|alpha|) with C taken from k = 0."""
        if self.log_C is None:
            return False
        with mpmath.workprec(self.prec + GUARD_BITS):
            la = mpmath.log(abs(mpf(self.alpha.numerator) / self.alpha.denominator))
            slack = mpf(2) ** (-self.prec // 2)
            return all(
                r.log_abs is not None and r.log_abs <= self.log_C + self.P**2 * self.p**r.k * la + slack
                for r in self.rows
            )

    def to_csv(self, digits: int = 20) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("k", "log_abs", "decay_exponent"))
        for r in self.rows:
            w.writerow((r.k, _fmt(r.log_abs, digits), _fmt(r.decay_exponent, digits)))
        return buf.getvalue()


def _fmt(x, digits):
    return "nan" if x is None else mpmath.nstr(x, digits)


def _eval_aux_at(s: AuxScheme, x: Fraction, prec: int) -> ApproxValue:
    wp = prec + GUARD_BITS
    tval = eval_product(s.p, x, prec=prec)
    with mpmath.workprec(wp):
        u = mpf(2) ** (3 - wp)
        total = mpf(0)
        rad = mpf(0)
        tpow = ApproxValue(mpf(1), mpf(0), wp=wp)
        for j in range(s.P + 1):
            if j:
                tpow = tpow * tval
            aj = s.a_poly(j, x)
            if not aj:
                continue
            am = mpf(aj.numerator) / aj.denominator
            term = am * tpow.mid
            total += term
            rad += abs(am) * tpow.rad + abs(term) * 2 * u + abs(total) * u
    return ApproxValue(total, rad * (1 + mpf(2) ** -32), tval.terms, wp=wp)


def decay_experiment(s: AuxScheme, alpha, kmax: int, prec: int = 256) -> DecayReport:
    """Evaluate E_P(alpha**(p**k)) for k = 0..kmax from rigorous T values.

    The polynomials a_j are evaluated exactly at the rational orbit point;
    only T_p carries an error radius.  Rows whose enclosure contains 0 are
    kept with ``log_abs = None`` rather than raising.
    """
    a = to_rational(alpha)
    if not (0 < abs(a) < 1):
        raise ValueError("alpha must satisfy 0 < |alpha| < 1")
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    rep = DecayReport(s.p, s.P, a, prec)
    wp = prec + GUARD_BITS
    for k in range(kmax + 1):
        x = a ** (s.p**k)
        val = _eval_aux_at(s, x, prec)
        with mpmath.workprec(wp):
            lx = mpmath.log(abs(mpf(x.numerator) / x.denominator))
            bounds = val.log_abs_bounds()
            if bounds is None:
                la = ex = None
            else:
                la = mpmath.log(abs(val.mid))
                ex = la / lx
        rep.rows.append(DecayRow(k, mpmath.exp(lx), val, la, ex))
    first = rep.rows[0]
    if first.log_abs is not None:
        with mpmath.workprec(wp):
            la0 = mpmath.log(abs(mpf(a.numerator) / a.denominator))
            rep.log_C = first.log_abs - s.P**2 * la0
            rep.rows = [
                DecayRow(r.k, r.point_modulus, r.value, r.log_abs, r.decay_exponent,
                         None if r.log_abs is None else (r.log_abs - rep.log_C) / (s.p**r.k * la0))
                for r in rep.rows
            ]
    return rep


# --------------------------------------------------------------------------
# height ledger


@dataclass(frozen=True)
class LedgerRow:
    k: int
    h_alpha_pk: float  # h(alpha^(p^k)) = p^k h(alpha)
    h_beta_sum: float  # bound on h(prod_{i<=k} beta_i)
    h_T_iterate: float  # bound on h(T(alpha^(p^k)))
    term_bound: float  # bound on h(a_j(.) T(.)^j)
    c1_chain: float  # bound on h(E_P(alpha^(p^k)))
    analytic: float  # -P^2 p^k log(1/|alpha|)
    arithmetic: float  # -c2 P p^k


@dataclass
class BoundLedger:
    p: int
    alpha: Fraction
    P: int
    C0: float
    C1: float
    c2: float
    h_T: float
    rows: list[LedgerRow] = field(default_factory=list)
    crossover_P: int = 0

    def ratio(self, k: int) -> float:
        row = next(r for r in self.rows if r.k == k)
        return row.analytic / row.arithmetic

    @property
    def contradiction(self) -> bool:
        """True when analytic decay beats the arithmetic floor at every k >= 1."""
        return all(r.analytic < r.arithmetic for r in self.rows if r.k >= 1)

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("k", "analytic", "arithmetic"))
        for r in self.rows:
            w.writerow((r.k, f"{r.analytic:.{digits}g}", f"{r.arithmetic:.{digits}g}"))
        return buf.getvalue()

    def to_detailed_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("k", "h_alpha_pk", "h_beta_sum", "h_T_iterate", "term_bound", "c1_chain",
                    "analytic", "arithmetic"))
        for r in self.rows:
            w.writerow((r.k,) + tuple(
                f"{v:.{digits}g}" for v in (r.h_alpha_pk, r.h_beta_sum, r.h_T_iterate,
                                           r.term_bound, r.c1_chain, r.analytic, r.arithmetic)))
        return buf.getvalue()


def _coeff_height_constant(s: AuxScheme) -> float:
    return s.max_coeff_height() / s.P


def height_ledger(p: int, alpha, P: int, kmax: int, scheme: AuxScheme | None = None,
                  tab: CoeffTable | None = None, C0: float | None = None,
                  h_T: float = 0.0) -> BoundLedger:
    """Instantiate the height chain for E_P at ``alpha**(p**k)``, k = 1..kmax.

    ``C0`` defaults to (max log|d_{j,l}|) / P measured on ``scheme`` (built
    from ``tab`` if absent).  ``h_T`` stands for h(T_p(alpha)) under the
    hypothesis that T_p(alpha) is algebraic; it is a free parameter.

    Over Q, Liouville's inequality is simply ``log|x| >= -h(x)`` for a
    nonzero rational x, so the arithmetic floor at step k is ``-c1_chain``;
    c2 is the smallest constant with ``c1_chain <= c2 P p^k`` on all rows.
    """
    require_prime(p)
    a = to_rational(alpha)
    if not (0 < abs(a) < 1):
        raise ValueError("alpha must be a nonzero rational with |alpha| < 1")
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    if C0 is None:
        if scheme is None:
            if tab is None:
                from .coeffs import gen_diff_recurrence

                tab = gen_diff_recurrence(p, P * P + P)
            scheme = build_aux(p, P, tab)
        if scheme.P != P or scheme.p != p:
            raise ValueError("scheme does not match (p, P)")
        C0 = _coeff_height_constant(scheme)
    h_a = float(rational_height(a))
    log_inv = -math.log(abs(a.numerator) / a.denominator)
    C1 = h_T + h_a + math.log(2) / (p - 1)
    lp1 = math.log(P + 1)
    raw = []
    for k in range(1, kmax + 1):
        pk = p**k
        h_apk = pk * h_a
        h_beta = k * h_a + math.log(2) * sum(1 / p**i for i in range(1, k + 1))
        h_Tk = h_T + h_beta
        term = C0 * P + P * pk * h_a + lp1 + C1 * P * k
        chain = term + lp1
        analytic = -(P * P) * pk * log_inv
        raw.append((k, h_apk, h_beta, h_Tk, term, chain, analytic))
    c2 = max(chain / (P * p**k) for k, _, _, _, _, chain, _ in raw)
    led = BoundLedger(p, a, P, C0, C1, c2, h_T)
    for k, h_apk, h_beta, h_Tk, term, chain, analytic in raw:
        led.rows.append(LedgerRow(k, h_apk, h_beta, h_Tk, term, chain, analytic, -c2 * P * p**k))
    led.crossover_P = math.floor(c2 / log_inv) + 1
    return led


@dataclass
class LedgerSweep:
    p: int
    alpha: Fraction
    k: int
    ledgers: dict[int, BoundLedger]
    C0: float

    def ratios(self) -> dict[int, float]:
        return {P: led.ratio(self.k) for P, led in self.ledgers.items()}

    def slope_error(self) -> float:
        """Largest relative deviation of successive ratio increments from their mean."""
        Ps = sorted(self.ledgers)
        r = self.ratios()
        diffs = [(r[b] - r[a]) / (b - a) for a, b in zip(Ps, Ps[1:])]
        mean = sum(diffs) / len(diffs)
        return max(abs(d - mean) for d in diffs) / abs(mean)

    def least_squares_slope(self) -> tuple[float, float]:
        Ps = sorted(self.ledgers)
        r = self.ratios()
        n = len(Ps)
        mx = sum(Ps) / n
        my = sum(r[P] for P in Ps) / n
        sxx = sum((P - mx) ** 2 for P in Ps)
        sxy = sum((P - mx) * (r[P] - my) for P in Ps)
        slope = sxy / sxx
        return slope, my - slope * mx

    @property
    def crossover_P(self) -> int:
        return max(led.crossover_P for led in self.ledgers.values())


def ledger_sweep(p: int, alpha, Ps, k: int = 1, kmax: int = 6, h_T: float = 0.0,
                 tab: CoeffTable | None = None) -> LedgerSweep:
    """Ledgers for several P sharing one coefficient-height constant.

    C0 is the largest (max log|d|)/P over the schemes built for ``Ps``,
    i.e. a single constant valid for every P in the sweep.
    """
    Ps = sorted(Ps)
    if tab is None:
        from .coeffs import gen_diff_recurrence

        tab = gen_diff_recurrence(p, max(Ps) ** 2 + max(Ps))
    schemes = {P: build_aux(p, P, tab) for P in Ps}
    C0 = max(_coeff_height_constant(s) for s in schemes.values())
    ledgers = {P: height_ledger(p, alpha, P, kmax, C0=C0, h_T=h_T) for P in Ps}
    return LedgerSweep(p, to_rational(alpha), k, ledgers, C0)


# --------------------------------------------------------------------------
# two variables


def counting_ok(P: int, m: int = 2) -> tuple[bool, int, int]:
    """(unknowns > conditions, unknowns, conditions) for the m-variable system."""
    unknowns = (P + 1) ** m * comb(m + P, m)
    conditions = comb(m + P * P, m)
    return unknowns > conditions, unknowns, conditions


@dataclass(frozen=True)
class BivariateScheme:
    p: int
    P: int
    # coefficient of z1^l1 z2^l2 T(z1)^j1 T(z2)^j2, keyed (j1, j2, l1, l2)
    d: dict
    nullity: int
    rank: int
    unknowns: int
    conditions: int

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "P": self.P,
            "m": 2,
            "d": [[j1, j2, l1, l2, c] for (j1, j2, l1, l2), c in sorted(self.d.items())],
        }


def _monomials(P: int):
    return [(l1, l2) for l1 in range(P + 1) for l2 in range(P + 1 - l1)]


def build_aux_bivariate(p: int, P: int, tab: CoeffTable, m: int = 2) -> BivariateScheme:
    """Kill every Taylor coefficient of total degree <= P^2 of E_P(z1, z2).

    That is C(2 + P^2, 2) conditions, one per monomial z1^L1 z2^L2 with
    L1 + L2 <= P^2.
    """
    require_prime(p)
    if m != 2:
        raise ValueError("only m = 2 is supported")
    if tab.p != p:
        raise ValueError(f"table is for p={tab.p}, not {p}")
    if P < 1:
        raise ValueError("P must be >= 1")
    if tab.N < P * P + P:
        raise ValueError(f"table order {tab.N} < P^2 + P = {P * P + P}")
    ok, unknowns, conditions = counting_ok(P, m)
    if not ok:
        raise SchemeError(f"counting fails for P={P}: {unknowns} unknowns vs {conditions} conditions")
    D = P * P
    powers = _powers_by_multiplication(tab, P, D)
    cols = [(j1, j2, l1, l2) for j1 in range(P + 1) for j2 in range(P + 1) for l1, l2 in _monomials(P)]
    rows = []
    for L1 in range(D + 1):
        for L2 in range(D + 1 - L1):
            row = []
            for j1, j2, l1, l2 in cols:
                if l1 > L1 or l2 > L2:
                    row.append(0)
                else:
                    row.append(powers[j1][L1 - l1] * powers[j2][L2 - l2])
            rows.append(row)
    if len(rows) != conditions:
        raise SchemeError(f"built {len(rows)} conditions, expected {conditions}")
    ns = nullspace(rows, len(cols))
    if ns.dimension == 0:
        raise SchemeError("bivariate system has full column rank")
    vec = ns.basis[_pick(ns.basis)]
    d = {c: v for c, v in zip(cols, vec) if v}
    return BivariateScheme(p, P, d, ns.dimension, ns.rank, unknowns, conditions)


def verify_bivariate_vanishing(s: BivariateScheme, tab1: CoeffTable, tab2: CoeffTable,
                               N: int) -> int | None:
    """Smallest total degree < = N carrying a nonzero coefficient, or None.

    Each variable gets its own table, so two independently generated
    tables cross-check the construction.
    """
    if tab1.N < N or tab2.N < N:
        raise ValueError("tables too short")
    T1, T2 = tab1.series(N), tab2.series(N)
    pw1 = [TruncSeries.one(N)]
    pw2 = [TruncSeries.one(N)]
    for _ in range(s.P):
        pw1.append(ps_mul(pw1[-1], T1))
        pw2.append(ps_mul(pw2[-1], T2))
    # grid[L1][L2] accumulates coefficients of z1^L1 z2^L2, L1 + L2 <= N
    grid = [[Fraction(0)] * (N + 1 - L1) for L1 in range(N + 1)]
    for (j1, j2, l1, l2), c in s.d.items():
        A = pw1[j1]
        B = pw2[j2]
        for i1 in range(N + 1 - l1):
            a = A[i1]
            if not a:
                continue
            L1 = i1 + l1
            ca = c * a
            for i2 in range(N + 1 - L1 - l2):
                b = B[i2]
                if b:
                    grid[L1][i2 + l2] += ca * b
    for total in range(N + 1):
        for L1 in range(total + 1):
            if grid[L1][total - L1]:
                return total
    return None


# --------------------------------------------------------------------------
# regularity


@dataclass(frozen=True)
class RegularityReport:
    p: int
    alpha: Point
    kmax: int
    g_values: tuple[int, ...]
    denominators: tuple[Fraction, ...]  # 1 - alpha^(p^(k+1)), real part if complex

    @property
    def passed(self) -> bool:
        return all(g != 0 for g in self.g_values) and all(d != 0 for d in self.denominators)


def regularity_check(p: int, alpha, kmax: int) -> RegularityReport:
    """g = 1 along the orbit, and ``1 - alpha**(p**(k+1)) != 0`` for k <= kmax."""
    require_prime(p)
    pt = as_point(alpha)
    if pt.abs2 == 0 or pt.abs2 >= 1:
        raise ValueError("alpha must satisfy 0 < |alpha| < 1")
    g = tuple(1 for _ in range(kmax + 1))
    dens = []
    for k in range(kmax + 1):
        w = pt ** (p ** (k + 1))
        one_minus = Point(1 - w.re, -w.im)
        if one_minus.abs2 == 0:
            dens.append(Fraction(0))
        else:
            dens.append(one_minus.re if one_minus.is_real else one_minus.abs2)
    return RegularityReport(p, pt, kmax, g, tuple(dens))
