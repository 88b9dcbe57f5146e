"""Taylor coefficients t_p(n) of T_p(z) = prod_{j>=1} (1 - z^(p^j))^(-1/p^j).

Three generators that share nothing beyond exact rational arithmetic:

``gen_log_exp``
    exponentiate ``sum nu_p(n)/n z^n`` (the reference route).
``gen_cauchy_recurrence``
    solve ``T(z)^p (1 - z^p) = T(z^p)`` one multiple of p at a time,
    keeping the powers of the known prefix up to date.
``gen_diff_recurrence``
    ``n t(n) = sum_{j>=1} sum_{1<=m<=n/p^j} t(n - m p^j)`` from the
    logarithmic derivative of the product.

The checkers return :class:`CheckReport` objects instead of raising so that
callers (tests, the CLI) can print every offending index.
"""
from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable

from .arith import (
    _nu,
    format_rational,
    is_p_power_denominator,
    require_prime,
)
from .series import (
    TruncSeries,
    ps_div_one_minus_zp,
    ps_exp,
    ps_mul,
    ps_pow,
    ps_substitute_power,
)

__all__ = [
    "Algorithm",
    "CoeffTable",
    "CheckReport",
    "log_series",
    "gen_log_exp",
    "gen_cauchy_recurrence",
    "gen_diff_recurrence",
    "generate",
    "check_vanishing",
    "check_p_integrality",
    "check_functional_equation",
    "check_functional_equation_rhs",
    "functional_equation_residual",
    "golden_table",
    "golden_csv",
    "GOLDEN_PRIMES",
    "GOLDEN_N",
    "tables_to_csv",
    "tables_from_csv",
    "CSVFormatError",
    "CSV_HEADER",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class Algorithm(str, enum.Enum):
    LOG_EXP = "LogExp"
    CAUCHY_RECURRENCE = "CauchyRecurrence"
    DIFF_RECURRENCE = "DiffRecurrence"

    @classmethod
    def parse(cls, name: str) -> Algorithm:
        key = name.strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "logexp": cls.LOG_EXP,
            "log": cls.LOG_EXP,
            "exp": cls.LOG_EXP,
            "cauchyrecurrence": cls.CAUCHY_RECURRENCE,
            "cauchy": cls.CAUCHY_RECURRENCE,
            "diffrecurrence": cls.DIFF_RECURRENCE,
            "diff": cls.DIFF_RECURRENCE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown algorithm {name!r}") from None


@dataclass(frozen=True)
class CoeffTable:
    p: int
    N: int
    t: tuple[Fraction, ...]
    algorithm: Algorithm

    def __post_init__(self):
        if len(self.t) != self.N + 1:
            raise ValueError(f"table for N={self.N} needs {self.N + 1} entries, got {len(self.t)}")

    def __getitem__(self, n: int) -> Fraction:
        return self.t[n]

    def series(self, order: int | None = None) -> TruncSeries:
        s = TruncSeries(self.t)
        return s if order is None else s.truncate(order)

    def same_values(self, other: CoeffTable) -> bool:
        return self.p == other.p and self.t == other.t

    def with_value(self, n: int, value) -> CoeffTable:
        """Copy with ``t[n]`` replaced; used for fault injection."""
        t = list(self.t)
        t[n] = Fraction(value)
        return CoeffTable(self.p, self.N, tuple(t), self.algorithm)

    def valuations(self) -> list[int | None]:
        """Observed nu_p(t(n)), ``None`` where t(n) = 0."""
        out: list[int | None] = []
        for c in self.t:
            if not c:
                out.append(None)
            else:
                out.append(_nu(self.p, abs(c.numerator)) - _nu(self.p, c.denominator))
        return out

    def to_json(self) -> dict:
        doc = TruncSeries(self.t).to_json()
        doc["p"] = self.p
        doc["algorithm"] = self.algorithm.value
        return doc

    @classmethod
    def from_json(cls, doc) -> CoeffTable:
        if isinstance(doc, str):
            doc = json.loads(doc)
        s = TruncSeries.from_json(doc)
        return cls(int(doc["p"]), s.order, s.coeffs, Algorithm(doc["algorithm"]))

    def to_csv(self) -> str:
        return tables_to_csv([self])


# --------------------------------------------------------------------------
# generators


def log_series(p: int, N: int) -> TruncSeries:
    """``sum_{n=1..N} nu_p(n)/n z^n``."""
    require_prime(p)
    coeffs = [_ZERO] * (N + 1)
    m = p
    while m <= N:
        coeffs[m] = Fraction(_nu(p, m), m)
        m += p
    return TruncSeries(coeffs, N)


def _check_order(N: int) -> None:
    if isinstance(N, bool) or not isinstance(N, int):
        raise TypeError("N must be an int")
    if N < 0:
        raise ValueError("N must be >= 0")


def gen_log_exp(p: int, N: int) -> CoeffTable:
    require_prime(p)
    _check_order(N)
    return CoeffTable(p, N, ps_exp(log_series(p, N)).coeffs, Algorithm.LOG_EXP)


def gen_cauchy_recurrence(p: int, N: int) -> CoeffTable:
    """Solve ``S(m) + p t(pm) = t(0) + ... + t(m)`` for each m.

    ``S(m)`` is the ``z^(pm)`` coefficient of ``A^p`` where A is the
    prefix ``t(0) + ... + t(pm-1) z^(pm-1)``.  All powers ``A^1 .. A^p``
    are stored; fixing ``t(n) = c`` updates them in place by the binomial
    expansion ``(A + c z^n)^k = sum_i C(k,i) c^i z^(ni) A^(k-i)``, touching
    only indices >= n.
    """
    require_prime(p)
    _check_order(N)
    t = [_ZERO] * (N + 1)
    t[0] = _ONE
    # powers[k][i] is the z^i coefficient of A^k; powers[0] is the constant 1
    powers = [[_ONE] + [_ZERO] * N for _ in range(p + 1)]
    running = _ONE  # t(0) + ... + t(m)
    for m in range(1, N // p + 1):
        n = p * m
        running += t[m]
        c = (running - powers[p][n]) / p
        t[n] = c
        # update high powers first so the lower ones are still the old prefix
        cpow = [_ONE]
        for _ in range(p):
            cpow.append(cpow[-1] * c)
        for k in range(p, 0, -1):
            target = powers[k]
            for i in range(1, k + 1):
                shift = n * i
                if shift > N:
                    break
                coef = comb(k, i) * cpow[i]
                src = powers[k - i]
                for idx in range(0, N - shift + 1, p):
                    v = src[idx]
                    if v:
                        target[idx + shift] += coef * v
    return CoeffTable(p, N, tuple(t), Algorithm.CAUCHY_RECURRENCE)


def gen_diff_recurrence(p: int, N: int) -> CoeffTable:
    """``t(n) = (1/n) sum_j sum_{m>=1} t(n - m p^j)``.

    For fixed j the inner sum runs over all earlier indices congruent to n
    modulo ``p^j``, so one running total per residue class replaces the
    loop over m.
    """
    require_prime(p)
    _check_order(N)
    t = [_ZERO] * (N + 1)
    t[0] = _ONE
    moduli = []
    q = p
    while q <= N:
        moduli.append(q)
        q *= p
    class_sums = [dict() for _ in moduli]
    for j, q in enumerate(moduli):
        class_sums[j][0] = _ONE
    for n in range(1, N + 1):
        s = _ZERO
        for j, q in enumerate(moduli):
            if q > n:
                break
            s += class_sums[j].get(n % q, _ZERO)
        if s:
            v = s / n
            t[n] = v
            for j, q in enumerate(moduli):
                r = n % q
                class_sums[j][r] = class_sums[j].get(r, _ZERO) + v
    return CoeffTable(p, N, tuple(t), Algorithm.DIFF_RECURRENCE)


_GENERATORS = {
    Algorithm.LOG_EXP: gen_log_exp,
    Algorithm.CAUCHY_RECURRENCE: gen_cauchy_recurrence,
    Algorithm.DIFF_RECURRENCE: gen_diff_recurrence,
}


def generate(p: int, N: int, algorithm: Algorithm | str = Algorithm.DIFF_RECURRENCE) -> CoeffTable:
    if isinstance(algorithm, str) and not isinstance(algorithm, Algorithm):
        algorithm = Algorithm.parse(algorithm)
    return _GENERATORS[algorithm](p, N)


# --------------------------------------------------------------------------
# checkers


@dataclass
class CheckReport:
    name: str
    passed: bool
    checked: int
    violations: list[tuple[int, str]] = field(default_factory=list)

    @property
    def first_violation(self) -> int | None:
        return self.violations[0][0] if self.violations else None

    def __bool__(self) -> bool:
        return self.passed

    def summary(self) -> str:
        status = "pass" if self.passed else f"FAIL at n={self.first_violation}"
        return f"{self.name}: {status} ({self.checked} checked, {len(self.violations)} violations)"


def check_vanishing(tab: CoeffTable) -> CheckReport:
    bad = [(n, format_rational(c)) for n, c in enumerate(tab.t) if n % tab.p and c]
    if tab.t[0] != 1:
        bad.insert(0, (0, format_rational(tab.t[0])))
    return CheckReport("vanishing", not bad, len(tab.t), bad)


def check_p_integrality(tab: CoeffTable) -> CheckReport:
    bad = []
    for n, c in enumerate(tab.t):
        if not c:
            continue
        rep = is_p_power_denominator(tab.p, c)
        if not rep.ok:
            bad.append((n, f"denominator {c.denominator} is not a power of {tab.p}"))
        elif not rep.numerator_coprime:
            bad.append((n, f"numerator {c.numerator} divisible by {tab.p}"))
    return CheckReport("p-integrality", not bad, len(tab.t), bad)


def functional_equation_residual(tab: CoeffTable) -> TruncSeries:
    """``T^p (1 - z^p) - T(z^p)`` through order N."""
    p = tab.p
    T = tab.series()
    one_minus = TruncSeries.one(tab.N) - TruncSeries.monomial(p, tab.N)
    return ps_mul(ps_pow(T, p), one_minus) - ps_substitute_power(T, p)


def check_functional_equation(tab: CoeffTable) -> CheckReport:
    r = functional_equation_residual(tab)
    bad = [(n, format_rational(c)) for n, c in enumerate(r) if c]
    return CheckReport("functional-equation", not bad, len(r), bad)


def check_functional_equation_rhs(tab: CoeffTable) -> CheckReport:
    """Same identity in the form ``T^p = T(z^p) / (1 - z^p)``."""
    p = tab.p
    T = tab.series()
    r = ps_pow(T, p) - ps_div_one_minus_zp(ps_substitute_power(T, p), p)
    bad = [(n, format_rational(c)) for n, c in enumerate(r) if c]
    return CheckReport("functional-equation (quotient form)", not bad, len(r), bad)


# --------------------------------------------------------------------------
# published values

GOLDEN_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)
GOLDEN_N = 20

# nonzero entries with n >= 1; everything else in 0..20 is zero except t(0) = 1
_GOLDEN_NONZERO = {
    2: {
        2: "1/2", 4: "5/8", 6: "7/16", 8: "83/128", 10: "119/256", 12: "561/1024",
        14: "887/2048", 16: "20739/32768", 18: "31275/65536", 20: "144427/262144",
    },
    3: {3: "1/3", 6: "2/9", 9: "23/81", 12: "44/243", 15: "109/729", 18: "1259/6561"},
    5: {5: "1/5", 10: "3/25", 15: "11/125", 20: "44/625"},
    7: {7: "1/7", 14: "4/49"},
    11: {11: "1/11"},
    13: {13: "1/13"},
    17: {17: "1/17"},
    19: {19: "1/19"},
}


def golden_table() -> dict[int, tuple[Fraction, ...]]:
    """Published t_p(n) for the eight primes up to 19 and n = 0..20."""
    out = {}
    for p in GOLDEN_PRIMES:
        row = [_ZERO] * (GOLDEN_N + 1)
        row[0] = _ONE
        for n, v in _GOLDEN_NONZERO[p].items():
            row[n] = Fraction(v)
        out[p] = tuple(row)
    return out


# --------------------------------------------------------------------------
# CSV

CSV_HEADER = ("p", "n", "numerator", "denominator")


def tables_to_csv(tables: Iterable[CoeffTable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for tab in tables:
        for n, c in enumerate(tab.t):
            w.writerow((tab.p, n, c.numerator, c.denominator))
    return buf.getvalue()


class CSVFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def tables_from_csv(text: str) -> dict[tuple[int, int], Fraction]:
    """Parse coefficient CSV into ``{(p, n): t_p(n)}``."""
    rows = csv.reader(io.StringIO(text))
    out: dict[tuple[int, int], Fraction] = {}
    header_seen = False
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not f.strip() for f in row):
            continue
        if not header_seen:
            if tuple(f.strip() for f in row) != CSV_HEADER:
                raise CSVFormatError(lineno, f"expected header {','.join(CSV_HEADER)}")
            header_seen = True
            continue
        if len(row) != 4:
            raise CSVFormatError(lineno, f"expected 4 fields, got {len(row)}")
        try:
            p, n, num, den = (int(f) for f in row)
        except ValueError:
            raise CSVFormatError(lineno, "non-integer field") from None
        if den <= 0:
            raise CSVFormatError(lineno, "denominator must be positive")
        if (p, n) in out:
            raise CSVFormatError(lineno, f"duplicate entry p={p} n={n}")
        out[(p, n)] = Fraction(num, den)
    if not header_seen:
        raise CSVFormatError(1, "empty file")
    return out


def golden_csv() -> str:
    g = golden_table()
    tabs = [CoeffTable(p, GOLDEN_N, g[p], Algorithm.LOG_EXP) for p in GOLDEN_PRIMES]
    return tables_to_csv(tabs)


