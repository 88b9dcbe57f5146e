"""Exact rational scalars, p-adic valuations and naive heights on Q.

Coefficients throughout the package are :class:`fractions.Fraction`
instances, which are always stored in lowest terms with a positive
denominator.  This module adds the number-theoretic predicates on top.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath

__all__ = [
    "ExactRational",
    "ValuationResult",
    "PDenominatorReport",
    "is_prime",
    "require_prime",
    "to_rational",
    "nu_p",
    "nu_p_rational",
    "is_p_power_denominator",
    "rational_height",
    "format_rational",
    "parse_rational",
    "bit_size",
]

ExactRational = Fraction

_TRIAL_LIMIT = 1 << 16
# Deterministic for n < 3.3e24; beyond that the test is probabilistic in
# principle but no counterexample to these bases is known.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_SMALL_PRIMES = [q for q in range(2, 256) if all(q % r for r in range(2, int(q**0.5) + 1))]


def is_prime(n: int) -> bool:
    """Primality by trial division below 2**16, Miller-Rabin above."""
    if n < 2:
        return False
    if n < _TRIAL_LIMIT:
        if n % 2 == 0:
            return n == 2
        f = 3
        while f * f <= n:
            if n % f == 0:
                return False
            f += 2
        return True
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def require_prime(p: int) -> int:
    if isinstance(p, bool) or not isinstance(p, int):
        raise TypeError(f"p must be an int, got {type(p).__name__}")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return p


def to_rational(x) -> Fraction:
    """Coerce ints, Fractions, "a/b" or decimal strings to a Fraction.

    Floats are rejected: their binary expansion is rarely what the caller
    meant, and silently converting them defeats exact arithmetic.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class ValuationResult:
    value: int
    is_infinite: bool = False

    def __post_init__(self):
        if self.is_infinite and self.value != 0:
            raise ValueError("infinite valuation carries no finite value")

    def __int__(self) -> int:
        if self.is_infinite:
            raise ValueError("valuation of 0 is infinite")
        return self.value

    def __add__(self, other: ValuationResult) -> ValuationResult:
        if self.is_infinite or other.is_infinite:
            return INFINITE_VALUATION
        return ValuationResult(self.value + other.value)


INFINITE_VALUATION = ValuationResult(0, is_infinite=True)


def _nu(p: int, n: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def nu_p(p: int, n: int) -> int:
    """Exponent of the prime `p` in the positive integer `n`."""
    require_prime(p)
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError("n must be an int")
    if n == 0:
        raise ValueError("nu_p(0) is infinite")
    if n < 0:
        raise ValueError("n must be positive")
    return _nu(p, n)


def nu_p_rational(p: int, x) -> ValuationResult:
    require_prime(p)
    x = to_rational(x)
    if x == 0:
        return INFINITE_VALUATION
    return ValuationResult(_nu(p, abs(x.numerator)) - _nu(p, x.denominator))


@dataclass(frozen=True)
class PDenominatorReport:
    """Outcome of :func:`is_p_power_denominator`.

    ``exponent`` is k when the denominator equals p**k and ``None``
    otherwise.  ``numerator_coprime`` is only meaningful when k > 0.
    """

    ok: bool
    exponent: int | None
    numerator_coprime: bool

    def __bool__(self) -> bool:
        return self.ok


def is_p_power_denominator(p: int, x) -> PDenominatorReport:
    require_prime(p)
    x = to_rational(x)
    den = x.denominator
    k = _nu(p, den)
    if den != p**k:
        return PDenominatorReport(False, None, x.numerator % p != 0)
    return PDenominatorReport(True, k, k == 0 or x.numerator % p != 0)


def rational_height(x, prec: int | None = None):
    """Logarithmic height log max(|a|, b) of a reduced fraction a/b.

    Returned as an mpmath float at the ambient (or given) precision.
    h(0) is taken to be 0.
    """
    x = to_rational(x)
    if x == 0:
        return mpmath.mpf(0)
    m = max(abs(x.numerator), x.denominator)
    if prec is None:
        return mpmath.log(m)
    with mpmath.workprec(prec):
        return +mpmath.log(m)


def format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return f"{x.numerator}/1"
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    s = s.strip()
    try:
        return Fraction(s)
    except ValueError:
        raise ValueError(f"not a rational literal: {s!r}") from None


def bit_size(x: Fraction) -> int:
    return max(abs(x.numerator).bit_length(), x.denominator.bit_length())

