"""Exact nullspaces of rational matrices by fraction-free elimination."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Sequence

__all__ = ["NullspaceResult", "nullspace", "primitive_vector", "max_bits"]


@dataclass(frozen=True)
class NullspaceResult:
    rank: int
    ncols: int
    pivots: tuple[int, ...]
    basis: tuple[tuple[int, ...], ...]  # primitive integer vectors, one per free column

    @property
    def dimension(self) -> int:
        return self.ncols - self.rank


def _content(row: list[int]) -> int:
    return reduce(gcd, row, 0)


def _integer_row(row: Sequence) -> list[int]:
    fr = [Fraction(x) for x in row]
    m = reduce(lcm, (x.denominator for x in fr), 1)
    return [int(x * m) for x in fr]


def primitive_vector(v: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to coprime integers, first nonzero entry positive."""
    ints = _integer_row(v)
    g = _content(ints)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def max_bits(v: Sequence[int]) -> int:
    return max(abs(x).bit_length() for x in v)


def nullspace(matrix: Sequence[Sequence], ncols: int | None = None) -> NullspaceResult:
    """Right nullspace of a rational matrix.

    Rows are scaled to integers, then reduced Gauss-Jordan style with
    ``row_i <- a_piv * row_i - a_i * row_piv`` followed by division by the
    row content, so no fractions appear until the basis is read off.  The
    pivot in each column is the candidate entry of smallest bit size.
    """
    rows = [_integer_row(r) for r in matrix]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if any(len(r) != ncols for r in rows):
        raise ValueError("ragged matrix")
    rows = [r for r in rows if any(r)]
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        best = None
        for i in range(rank, len(rows)):
            a = rows[i][col]
            if a and (best is None or abs(a).bit_length() < abs(rows[best][col]).bit_length()):
                best = i
        if best is None:
            continue
        rows[rank], rows[best] = rows[best], rows[rank]
        prow = rows[rank]
        a_piv = prow[col]
        for i, row in enumerate(rows):
            if i == rank:
                continue
            a = row[col]
            if not a:
                continue
            g = gcd(a_piv, a)
            mp, ma = a_piv // g, a // g
            new = [mp * x - ma * y for x, y in zip(row, prow)]
            c = _content(new)
            if c > 1:
                new = [x // c for x in new]
            rows[i] = new
        pivots.append(col)
        rank += 1
        if rank == len(rows):
            break
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = Fraction(-rows[r][f], rows[r][c])
        basis.append(primitive_vector(v))
    return NullspaceResult(rank, ncols, tuple(pivots), tuple(basis))
