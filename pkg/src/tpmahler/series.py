"""Dense truncated power series with exact rational coefficients.

A :class:`TruncSeries` of order ``N`` stores ``c_0, ..., c_N``; anything
beyond ``z**N`` is unknown, not zero.  Binary operations therefore return
a series whose order is the smaller of the operand orders.

Multiplication is schoolbook convolution.  Zero coefficients are skipped,
which matters here: the series of interest are supported on multiples of
a prime, so roughly ``(p-1)/p`` of the work disappears.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, Sequence

from .arith import format_rational, parse_rational, to_rational

__all__ = [
    "TruncSeries",
    "ps_mul",
    "ps_pow",
    "ps_substitute_power",
    "ps_div_one_minus_zp",
    "ps_log",
    "ps_exp",
    "ps_derivative",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class TruncSeries:
    """Immutable truncated power series ``sum c_n z**n + O(z**(order+1))``."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable, order: int | None = None):
        cs = [to_rational(c) for c in coeffs]
        if order is None:
            order = len(cs) - 1
        if order < 0:
            raise ValueError("order must be >= 0")
        if len(cs) > order + 1:
            cs = cs[: order + 1]
        else:
            cs.extend([_ZERO] * (order + 1 - len(cs)))
        self._coeffs = tuple(cs)

    @classmethod
    def _raw(cls, coeffs: list[Fraction]) -> TruncSeries:
        s = object.__new__(cls)
        s._coeffs = tuple(coeffs)
        return s

    @classmethod
    def one(cls, order: int) -> TruncSeries:
        return cls([1], order)

    @classmethod
    def monomial(cls, n: int, order: int, c=1) -> TruncSeries:
        cs = [_ZERO] * (order + 1)
        if n <= order:
            cs[n] = to_rational(c)
        return cls._raw(cs)

    @property
    def order(self) -> int:
        return len(self._coeffs) - 1

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._coeffs

    def __len__(self) -> int:
        return len(self._coeffs)

    def __getitem__(self, n):
        return self._coeffs[n]

    def __iter__(self):
        return iter(self._coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __repr__(self) -> str:
        shown = ", ".join(str(c) for c in self._coeffs[:8])
        more = ", ..." if self.order >= 8 else ""
        return f"TruncSeries([{shown}{more}], order={self.order})"

    def truncate(self, order: int) -> TruncSeries:
        if order > self.order:
            raise ValueError(f"cannot extend order {self.order} to {order}")
        return TruncSeries._raw(list(self._coeffs[: order + 1]))

    def __add__(self, other: TruncSeries) -> TruncSeries:
        n = min(self.order, other.order)
        return TruncSeries._raw([self[i] + other[i] for i in range(n + 1)])

    def __sub__(self, other: TruncSeries) -> TruncSeries:
        n = min(self.order, other.order)
        return TruncSeries._raw([self[i] - other[i] for i in range(n + 1)])

    def __neg__(self) -> TruncSeries:
        return TruncSeries._raw([-c for c in self._coeffs])

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            return ps_mul(self, other)
        c = to_rational(other)
        return TruncSeries._raw([c * a for a in self._coeffs])

    __rmul__ = __mul__

    def __pow__(self, e: int) -> TruncSeries:
        return ps_pow(self, e)

    def first_nonzero(self) -> int | None:
        for i, c in enumerate(self._coeffs):
            if c:
                return i
        return None

    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": [format_rational(c) for c in self._coeffs]}

    @classmethod
    def from_json(cls, doc) -> TruncSeries:
        if isinstance(doc, str):
            doc = json.loads(doc)
        coeffs = [parse_rational(c) for c in doc["coeffs"]]
        order = int(doc["order"])
        if len(coeffs) != order + 1:
            raise ValueError(f"expected {order + 1} coefficients, found {len(coeffs)}")
        return cls._raw(coeffs)


def _convolve(a: Sequence[Fraction], b: Sequence[Fraction], n: int) -> list[Fraction]:
    out = [_ZERO] * (n + 1)
    bnz = [(j, c) for j, c in enumerate(b[: n + 1]) if c]
    for i in range(n + 1):
        ai = a[i]
        if not ai:
            continue
        lim = n - i
        for j, bj in bnz:
            if j > lim:
                break
            out[i + j] += ai * bj
    return out


def ps_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    n = min(a.order, b.order)
    return TruncSeries._raw(_convolve(a.coeffs, b.coeffs, n))


def ps_pow(a: TruncSeries, e: int) -> TruncSeries:
    """``a**e`` by repeated squaring of truncated products."""
    if e < 1:
        raise ValueError("exponent must be >= 1")
    result = None
    base = a
    while True:
        if e & 1:
            result = base if result is None else ps_mul(result, base)
        e >>= 1
        if not e:
            return result
        base = ps_mul(base, base)


def ps_substitute_power(a: TruncSeries, p: int) -> TruncSeries:
    """``a(z**p)`` truncated at the order of ``a``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    n = a.order
    out = [_ZERO] * (n + 1)
    for m in range(n // p + 1):
        out[p * m] = a[m]
    return TruncSeries._raw(out)


def ps_div_one_minus_zp(a: TruncSeries, p: int) -> TruncSeries:
    """``a(z) / (1 - z**p)``: running sums along each residue class mod p."""
    if p < 1:
        raise ValueError("p must be >= 1")
    out = list(a.coeffs)
    for i in range(p, len(out)):
        out[i] += out[i - p]
    return TruncSeries._raw(out)


def ps_derivative(a: TruncSeries) -> TruncSeries:
    if a.order == 0:
        raise ValueError("derivative of an order-0 series has no known coefficients")
    return TruncSeries._raw([n * a[n] for n in range(1, a.order + 1)])


def ps_exp(a: TruncSeries) -> TruncSeries:
    """``exp(a)`` for ``a_0 = 0`` via ``E' = a' E``.

    Coefficientwise: ``n E_n = sum_{k=1..n} k a_k E_{n-k}``.
    """
    if a[0] != 0:
        raise ValueError("ps_exp needs a zero constant term")
    n = a.order
    ka = [(k, k * a[k]) for k in range(1, n + 1) if a[k]]
    e = [_ONE] + [_ZERO] * n
    for m in range(1, n + 1):
        s = _ZERO
        for k, c in ka:
            if k > m:
                break
            em = e[m - k]
            if em:
                s += c * em
        e[m] = s / m
    return TruncSeries._raw(e)


def ps_log(a: TruncSeries) -> TruncSeries:
    """``log(a)`` for ``a_0 = 1`` via ``L' a = a'``.

    Coefficientwise: ``n L_n = n a_n - sum_{k=1..n-1} k L_k a_{n-k}``.
    """
    if a[0] != 1:
        raise ValueError("ps_log needs constant term 1")
    n = a.order
    lg = [_ZERO] * (n + 1)
    anz = [(j, c) for j, c in enumerate(a.coeffs) if c and j]
    for m in range(1, n + 1):
        s = m * a[m]
        for j, c in anz:
            if j >= m:
                break
            lk = lg[m - j]
            if lk:
                s -= (m - j) * lk * c
        lg[m] = s / m
    return TruncSeries._raw(lg)
