"""Numeric evaluation of T_p inside the unit disk with error radii.

Points are exact Gaussian rationals (``Fraction`` real and imaginary
parts), so the test ``|alpha| < 1`` is decided exactly.  mpmath numbers
are accepted too and read as the dyadic rationals they are.

Error accounting
----------------
Everything runs at ``prec + GUARD_BITS``.  Each rounded operation is
charged ``u = 2**(3 - wp)`` relative error, which covers a complex
multiply (at most sqrt(5) ulps) with room to spare.  Errors are propagated
to first order; the ``n * u`` products that appear stay far below 1 for
every supported truncation, and that is asserted.  The final radius is
inflated by ``1 + 2**-32`` to absorb rounding in the radius arithmetic.

Truncation tails
----------------
log series
    ``|nu_p(n)/n| <= 1``, so the tail after N terms is at most
    ``r**(N+1) / (1 - r)`` with ``r = |alpha|``.
product
    ``|log(1 - w)| <= |w| / (1 - |w|)`` and ``|w| = r**(p**j)``, so the
    log-tail after J factors is at most
    ``sum_{j>J} r**(p**j) / (p**j (1 - r))``.  Consecutive terms shrink by
    ``r**(p**j (p-1)) / p <= q := r**(p**(J+1) (p-1)) / p`` for j > J, so
    the sum is below ``r**(p**(J+1)) / (p**(J+1) (1 - r) (1 - q))``.
Taylor series
    needs a bound on ``|t_p(n)|`` that nobody has proved; the observed
    maximum times 2 is used and the result is flagged non-rigorous.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpc, mpf

from .arith import _nu, require_prime, to_rational
from .coeffs import CoeffTable

__all__ = [
    "GUARD_BITS",
    "Point",
    "as_point",
    "ApproxValue",
    "Method",
    "EvalReport",
    "eval_log_series",
    "eval_log_product",
    "eval_product",
    "eval_series",
    "evaluate",
    "iterate_identity_check",
    "iterate_functional_check",
    "IterationRow",
    "boundary_probe",
    "growth_exponent",
    "ProbeRow",
    "ProbeTable",
    "EVAL_CSV_HEADER",
    "reports_to_csv",
]

GUARD_BITS = 32


# --------------------------------------------------------------------------
# points


def _mp_to_fraction(x) -> Fraction:
    # read the stored binary value; mpf(x) would round to the ambient precision
    sign, man, exp, _ = x._mpf_ if isinstance(x, mpf) else mpf(x)._mpf_
    if not man:
        if exp:  # inf / nan are encoded with man = 0 and nonzero exp
            raise ValueError(f"not a finite number: {x}")
        return Fraction(0)
    v = Fraction(int(man)) * Fraction(2) ** exp
    return -v if sign else v


@dataclass(frozen=True)
class Point:
    re: Fraction
    im: Fraction = Fraction(0)

    @property
    def is_real(self) -> bool:
        return self.im == 0

    @property
    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __pow__(self, e: int) -> Point:
        if self.is_real:
            return Point(self.re**e)
        # square-and-multiply in Z[i]-style exact arithmetic
        rr, ri = Fraction(1), Fraction(0)
        br, bi = self.re, self.im
        while e:
            if e & 1:
                rr, ri = rr * br - ri * bi, rr * bi + ri * br
            e >>= 1
            if e:
                br, bi = br * br - bi * bi, 2 * br * bi
        return Point(rr, ri)

    def to_mp(self):
        if self.is_real:
            return mpf(self.re.numerator) / self.re.denominator
        return mpc(mpf(self.re.numerator) / self.re.denominator, mpf(self.im.numerator) / self.im.denominator)

    def modulus_upper(self):
        """An mpf >= |point|, at the ambient precision."""
        with mpmath.workprec(mpmath.mp.prec + 8):
            a2 = self.abs2
            r = mpmath.sqrt(mpf(a2.numerator) / a2.denominator)
        return r * (1 + mpf(2) ** (8 - mpmath.mp.prec))

    def __str__(self) -> str:
        if self.is_real:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def as_point(alpha) -> Point:
    if isinstance(alpha, Point):
        return alpha
    if isinstance(alpha, tuple) and len(alpha) == 2:
        return Point(_coerce_real(alpha[0]), _coerce_real(alpha[1]))
    if isinstance(alpha, mpc):
        return Point(_mp_to_fraction(alpha.real), _mp_to_fraction(alpha.imag))
    return Point(_coerce_real(alpha))


def _coerce_real(x) -> Fraction:
    if isinstance(x, mpf):
        return _mp_to_fraction(x)
    return to_rational(x)


def _require_inside(pt: Point) -> None:
    if pt.abs2 >= 1:
        raise ValueError(f"point {pt} is not inside the open unit disk")


# --------------------------------------------------------------------------
# values with radii


@dataclass(frozen=True)
class ApproxValue:
    """``mid`` with ``|exact - mid| <= rad``.

    ``terms`` and ``rigorous`` record how the value was produced.
    """

    mid: object
    rad: mpf
    terms: int = 0
    rigorous: bool = True
    wp: int = 0

    @property
    def real(self) -> mpf:
        return mpmath.re(self.mid)

    @property
    def imag(self) -> mpf:
        return mpmath.im(self.mid)

    def contains(self, x) -> bool:
        return abs(self.mid - x) <= self.rad

    def overlaps(self, other: ApproxValue) -> bool:
        return abs(self.mid - other.mid) <= self.rad + other.rad

    def excludes_zero(self) -> bool:
        return abs(self.mid) > self.rad

    def exp(self, wp: int | None = None) -> ApproxValue:
        wp = wp or mpmath.mp.prec
        with mpmath.workprec(wp):
            u = _unit(wp)
            v = mpmath.exp(self.mid)
            av = abs(v)
            rad = av * mpmath.expm1(self.rad) + 4 * u * av
        return ApproxValue(v, _inflate(rad), self.terms, self.rigorous, wp)

    def __mul__(self, other: ApproxValue) -> ApproxValue:
        wp = max(mpmath.mp.prec, self.wp, other.wp)
        with mpmath.workprec(wp):
            u = _unit(wp)
            v = self.mid * other.mid
            a, b = abs(self.mid), abs(other.mid)
            rad = a * other.rad + b * self.rad + self.rad * other.rad + 4 * u * abs(v)
        return ApproxValue(v, _inflate(rad), max(self.terms, other.terms),
                           self.rigorous and other.rigorous, wp)

    def __pow__(self, e: int) -> ApproxValue:
        if e < 1:
            raise ValueError("exponent must be >= 1")
        out = self
        for _ in range(e - 1):
            out = out * self
        return out

    def log_abs_bounds(self) -> tuple[mpf, mpf] | None:
        """Enclosure of log|exact|, or None if the disk contains 0."""
        m = abs(self.mid)
        if m <= self.rad:
            return None
        return mpmath.log(m - self.rad), mpmath.log(m + self.rad)


def _unit(wp: int) -> mpf:
    return mpf(2) ** (3 - wp)


def _inflate(rad) -> mpf:
    return mpf(rad) * (1 + mpf(2) ** -32)


# --------------------------------------------------------------------------
# evaluators


class Method(str, enum.Enum):
    PRODUCT = "Product"
    SERIES_EXP = "SeriesExp"
    LOG_SERIES = "LogSeries"


@dataclass(frozen=True)
class EvalReport:
    point: str
    method: Method
    value: ApproxValue
    terms_used: int
    rigorous: bool

    def csv_row(self, digits: int = 40) -> tuple:
        v = self.value
        return (
            self.method.value,
            self.point,
            mpmath.nstr(v.real, digits),
            mpmath.nstr(v.imag, digits),
            mpmath.nstr(v.rad, 6),
            self.terms_used,
            str(self.rigorous).lower(),
        )


EVAL_CSV_HEADER = ("method", "point", "re", "im", "error_radius", "terms", "rigorous")


def reports_to_csv(reports, digits: int = 40) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EVAL_CSV_HEADER)
    for r in reports:
        w.writerow(r.csv_row(digits))
    return buf.getvalue()


def _geometric_terms(r: mpf, target: mpf) -> int:
    """Smallest N with r**(N+1) / (1 - r) <= target."""
    if r == 0:
        return 0
    need = mpmath.log(target * (1 - r)) / mpmath.log(r) - 1
    return max(0, int(mpmath.ceil(need)))


def eval_log_series(p: int, alpha, N: int | None = None, prec: int = 256) -> ApproxValue:
    """``log T_p(alpha) = sum nu_p(n)/n alpha**n`` with a certified radius.

    When ``N`` is omitted it is chosen so that the truncation tail is
    below ``2**-(prec+8)``.
    """
    require_prime(p)
    pt = as_point(alpha)
    _require_inside(pt)
    wp = prec + GUARD_BITS
    with mpmath.workprec(wp):
        u = _unit(wp)
        if pt.abs2 == 0:
            return ApproxValue(mpf(0), mpf(0), 0, wp=wp)
        r = pt.modulus_upper()
        if r >= 1:
            raise ValueError("point too close to the unit circle for this precision")
        if N is None:
            N = _geometric_terms(r, mpf(2) ** -(prec + 8))
        pow_cost = (2 * p.bit_length() + 2) * u
        if N * (u + pow_cost) > mpf(2) ** -20:
            raise ValueError(f"N={N} too large for {prec}-bit evaluation")
        x = pt.to_mp()
        x_p = x**p
        power = x_p
        total = mpf(0) if pt.is_real else mpc(0)
        err = mpf(0)
        for n in range(p, N + 1, p):
            if n > p:
                power *= x_p
            term = power * (mpf(_nu(p, n)) / n)
            total += term
            # input rounding amplified n times, one power plus one multiply per step
            rel = n * u + (n // p) * (pow_cost + u) + 3 * u
            err += abs(term) * rel + abs(total) * u
        tail = r ** (N + 1) / (1 - r)
        return ApproxValue(total, _inflate(err + tail), N, wp=wp)


def _product_terms(p: int, r: mpf, target: mpf) -> int:
    J = 1
    while _product_tail(p, r, J) > target:
        J += 1
    return J


def _product_tail(p: int, r: mpf, J: int) -> mpf:
    pj1 = p ** (J + 1)
    lead = r**pj1
    q = r ** (pj1 * (p - 1)) / p
    return lead / (pj1 * (1 - r) * (1 - q))


def eval_log_product(p: int, alpha, J: int | None = None, prec: int = 256) -> ApproxValue:
    """``sum_{j=1..J} -log(1 - alpha**(p**j)) / p**j`` plus the tail bound.

    Principal logarithms throughout; for real alpha every ``1 - w`` is a
    positive real and the sum is real.
    """
    require_prime(p)
    pt = as_point(alpha)
    _require_inside(pt)
    wp = prec + GUARD_BITS
    with mpmath.workprec(wp):
        u = _unit(wp)
        if pt.abs2 == 0:
            return ApproxValue(mpf(0), mpf(0), 0, wp=wp)
        r = pt.modulus_upper()
        if r >= 1:
            raise ValueError("point too close to the unit circle for this precision")
        if J is None:
            J = _product_terms(p, r, mpf(2) ** -(prec + 8))
        if J < 1:
            raise ValueError("J must be >= 1")
        x = pt.to_mp()
        total = mpf(0) if pt.is_real else mpc(0)
        err = mpf(0)
        w = x
        rel = u  # relative error of w
        pow_cost = (2 * p.bit_length() + 2) * u
        for j in range(1, J + 1):
            w = w**p
            rel = p * rel + pow_cost
            if rel > mpf(2) ** -20:
                raise ValueError(f"J={J} too large for {prec}-bit evaluation")
            aw = abs(w)
            one_minus = 1 - w
            lg = mpmath.log(one_minus)
            dw = aw * rel
            d_log = dw / (1 - aw - dw) + 2 * u + u * abs(lg)
            pj = mpf(p) ** j
            term = -lg / pj
            total += term
            err += d_log / pj + abs(term) * u + abs(total) * u
        tail = _product_tail(p, r, J)
        return ApproxValue(total, _inflate(err + tail), J, wp=wp)


def eval_product(p: int, alpha, J: int | None = None, prec: int = 256) -> ApproxValue:
    """``prod_{j=1..J} (1 - alpha**(p**j))**(-1/p**j)`` with the tail folded in."""
    lg = eval_log_product(p, alpha, J, prec)
    if lg.rad == 0 and lg.mid == 0:
        return ApproxValue(mpf(1), mpf(0), lg.terms, wp=lg.wp)
    return lg.exp(prec + GUARD_BITS)


def eval_series(p: int, alpha, tab: CoeffTable, prec: int = 256) -> ApproxValue:
    """Partial Taylor sum from a coefficient table.

    The tail uses ``2 * max |t_p(n)|`` as a coefficient bound, which is
    observed but unproven, hence ``rigorous=False``.
    """
    require_prime(p)
    if tab.p != p:
        raise ValueError(f"table is for p={tab.p}, not {p}")
    pt = as_point(alpha)
    _require_inside(pt)
    wp = prec + GUARD_BITS
    with mpmath.workprec(wp):
        u = _unit(wp)
        if pt.abs2 == 0:
            return ApproxValue(mpf(tab.t[0].numerator) / tab.t[0].denominator, mpf(0), 0, rigorous=False, wp=wp)
        N = tab.N
        if (2 * N + 8) * u > mpf(2) ** -20:
            raise ValueError(f"N={N} too large for {prec}-bit evaluation")
        x = pt.to_mp()
        total = mpf(1) if pt.is_real else mpc(1)
        err = mpf(0)
        power = mpf(1)
        M = mpf(0)
        for n in range(1, N + 1):
            power = power * x
            c = tab.t[n]
            if not c:
                continue
            cm = mpf(c.numerator) / c.denominator
            M = max(M, abs(cm))
            term = power * cm
            total += term
            err += abs(term) * (2 * n + 6) * u + abs(total) * u
        r = pt.modulus_upper()
        tail = 2 * M * r ** (N + 1) / (1 - r)
        return ApproxValue(total, _inflate(err + tail), N, rigorous=False, wp=wp)


def evaluate(p: int, alpha, method: Method | str = Method.PRODUCT, prec: int = 256,
             terms: int | None = None, tab: CoeffTable | None = None) -> EvalReport:
    """Dispatch used by the CLI; the log-series route is exponentiated."""
    method = Method(method)
    pt = as_point(alpha)
    if method is Method.PRODUCT:
        v = eval_product(p, pt, terms, prec)
    elif method is Method.LOG_SERIES:
        lg = eval_log_series(p, pt, terms, prec)
        v = lg.exp(prec + GUARD_BITS) if lg.rad or lg.mid else ApproxValue(mpf(1), mpf(0), 0, wp=prec + GUARD_BITS)
    else:
        if tab is None:
            from .coeffs import gen_diff_recurrence

            tab = gen_diff_recurrence(p, terms if terms is not None else _series_order(pt, prec))
        v = eval_series(p, pt, tab, prec)
    return EvalReport(str(pt), method, v, v.terms, v.rigorous)


def _series_order(pt: Point, prec: int) -> int:
    if pt.abs2 == 0:
        return 0
    with mpmath.workprec(prec + GUARD_BITS):
        return _geometric_terms(pt.modulus_upper(), mpf(2) ** -(prec + 8))


# --------------------------------------------------------------------------
# iteration identity


@dataclass(frozen=True)
class IterationRow:
    k: int
    lhs: ApproxValue
    rhs: ApproxValue
    residual: mpf

    @property
    def ok(self) -> bool:
        return self.residual <= self.lhs.rad + self.rhs.rad


def _root_factor(pt: Point, i: int, p: int, prec: int) -> ApproxValue:
    """``(1 - pt**(p**i)) ** (1/p**i)`` via exp(log(.)/p**i)."""
    wp = prec + GUARD_BITS
    w = pt ** (p**i)
    base = Point(1 - w.re, -w.im)
    with mpmath.workprec(wp):
        u = _unit(wp)
        b = base.to_mp()  # one rounding per component
        lg = mpmath.log(b)
        pi_ = mpf(p) ** i
        e = lg / pi_
        err = (2 * u + u * abs(lg)) / pi_ + abs(e) * u
    return ApproxValue(e, _inflate(err), wp=wp).exp(wp)


def _scaled(v: ApproxValue, d: int) -> ApproxValue:
    with mpmath.workprec(v.wp):
        mid = v.mid / d
        rad = v.rad / d + abs(mid) * _unit(v.wp)
    return ApproxValue(mid, _inflate(rad), v.terms, v.rigorous, v.wp)


def iterate_identity_check(p: int, alpha, kmax: int, prec: int = 256,
                           form: str = "stated") -> list[IterationRow]:
    """Check the orbit identity for T_p along ``alpha, alpha**p, alpha**(p**2), ...``.

    The right-hand side is always ``T(alpha) prod_{i<=k} (1 - alpha**(p**i))**(1/p**i)``.
    With ``form="stated"`` it is compared with ``T(alpha**(p**k))``; with
    ``form="root"`` it is compared with ``T(alpha**(p**k))**(1/p**k)``,
    which is what iterating ``T(z**p) = (1 - z**p) T(z)**p`` actually gives.
    The stated form fails for every k >= 1 at any nonzero alpha.
    """
    if form not in ("stated", "root"):
        raise ValueError("form must be 'stated' or 'root'")
    require_prime(p)
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    pt = as_point(alpha)
    _require_inside(pt)
    base = eval_product(p, pt, prec=prec)
    rows = []
    rhs = base
    for k in range(kmax + 1):
        if k:
            rhs = rhs * _root_factor(pt, k, p, prec)
            if form == "stated":
                lhs = eval_product(p, pt ** (p**k), prec=prec)
            else:
                lg = eval_log_product(p, pt ** (p**k), prec=prec)
                lhs = _scaled(lg, p**k).exp(lg.wp)
        else:
            lhs = base
        with mpmath.workprec(prec + GUARD_BITS):
            res = abs(lhs.mid - rhs.mid)
        rows.append(IterationRow(k, lhs, rhs, res))
    return rows


def iterate_functional_check(p: int, alpha, kmax: int, prec: int = 256) -> list[IterationRow]:
    """``T(alpha**(p**k))`` against ``T(alpha**(p**(k-1)))**p (1 - alpha**(p**k))``.

    One step of the functional equation at a time; the factor is exact.
    """
    require_prime(p)
    pt = as_point(alpha)
    _require_inside(pt)
    wp = prec + GUARD_BITS
    rows = []
    prev = eval_product(p, pt, prec=prec)
    rows.append(IterationRow(0, prev, prev, mpf(0)))
    for k in range(1, kmax + 1):
        w = pt ** (p**k)
        lhs = eval_product(p, w, prec=prec)
        with mpmath.workprec(wp):
            f = Point(1 - w.re, -w.im).to_mp()
            fac = ApproxValue(f, _inflate(abs(f) * _unit(wp)), wp=wp)
        rhs = (prev**p) * fac
        with mpmath.workprec(wp):
            res = abs(lhs.mid - rhs.mid)
        rows.append(IterationRow(k, lhs, rhs, res))
        prev = lhs
    return rows


# --------------------------------------------------------------------------
# boundary probe


@dataclass(frozen=True)
class ProbeRow:
    r: Fraction
    log_real: ApproxValue
    log_ray: ApproxValue

    @property
    def ray_minus_real(self) -> mpf:
        with mpmath.workprec(max(self.log_ray.wp, self.log_real.wp, 53)):
            return self.log_ray.real - self.log_real.real


@dataclass
class ProbeTable:
    p: int
    root_order: int
    rows: list[ProbeRow] = field(default_factory=list)
    monotone: bool = False
    positive: bool = False

    def to_csv(self, digits: int = 30) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("r", "log_T_real", "log_abs_T_ray", "radius_real", "radius_ray"))
        for row in self.rows:
            w.writerow((
                str(row.r),
                mpmath.nstr(row.log_real.real, digits),
                mpmath.nstr(row.log_ray.real, digits),
                mpmath.nstr(row.log_real.rad, 6),
                mpmath.nstr(row.log_ray.rad, 6),
            ))
        return buf.getvalue()


def boundary_probe(p: int, root_order: int, radii, prec: int = 256) -> ProbeTable:
    """``log T_p(r)`` and ``log |T_p(r zeta)|`` for ``zeta = exp(2 pi i / p**root_order)``.

    The ray points are the working-precision roundings of ``r * zeta``,
    i.e. exact dyadic points within ``2**-wp`` of the ray.

    Raises ``AssertionError`` unless ``log T_p(r)`` is certified positive
    and strictly increasing along the real ray.
    """
    require_prime(p)
    if root_order < 0:
        raise ValueError("root_order must be >= 0")
    rs = [to_rational(r) if not isinstance(r, float) else Fraction(repr(r)) for r in radii]
    if any(not (0 < r < 1) for r in rs):
        raise ValueError("radii must lie in (0, 1)")
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("radii must be strictly increasing")
    wp = prec + GUARD_BITS
    with mpmath.workprec(wp):
        zeta = mpmath.expjpi(mpf(2) / mpf(p) ** root_order)
    out = ProbeTable(p, root_order)
    for r in rs:
        real = eval_log_product(p, r, prec=prec)
        with mpmath.workprec(wp):
            z = (mpf(r.numerator) / r.denominator) * zeta
        if z.imag == 0 or abs(z.imag) < mpf(2) ** (-wp):
            ray = eval_log_product(p, as_point(z.real), prec=prec)
        else:
            ray = eval_log_product(p, as_point(z), prec=prec)
        out.rows.append(ProbeRow(r, real, ray))
    lows = [row.log_real.real - row.log_real.rad for row in out.rows]
    highs = [row.log_real.real + row.log_real.rad for row in out.rows]
    out.positive = all(lo > 0 for lo in lows)
    out.monotone = all(lows[i + 1] > highs[i] for i in range(len(lows) - 1))
    assert out.positive, "log T_p(r) not certified positive"
    assert out.monotone, "log T_p(r) not certified increasing"
    return out


def growth_exponent(row_a: ProbeRow, row_b: ProbeRow) -> tuple[float, float]:
    """Finite-difference slope of log|T| in log(1/(1-r)) along both rays."""
    la = math.log(1 / (1 - float(row_a.r)))
    lb = math.log(1 / (1 - float(row_b.r)))
    d = lb - la
    return (
        float(row_b.log_real.real - row_a.log_real.real) / d,
        float(row_b.log_ray.real - row_a.log_ray.real) / d,
    )
