from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tpmahler.linalg import nullspace, primitive_vector


def rank_oracle(rows, ncols):
    # plain rational row reduction
    m = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


matrices = st.integers(min_value=1, max_value=6).flatmap(
    lambda n: st.lists(
        st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=7), min_size=n, max_size=n),
        min_size=0, max_size=6,
    ).map(lambda rows: (rows, n))
)


@given(matrices)
def test_nullspace_vectors_annihilate(mat):
    rows, n = mat
    ns = nullspace(rows, n)
    assert ns.rank == rank_oracle(rows, n)
    assert ns.dimension == len(ns.basis) == n - ns.rank
    for v in ns.basis:
        assert all(isinstance(x, int) for x in v)
        assert any(v)
        for r in rows:
            assert sum(Fraction(a) * b for a, b in zip(r, v)) == 0


def test_known_kernel():
    ns = nullspace([[1, 2, 3], [2, 4, 6]], 3)
    assert ns.rank == 1
    assert set(ns.basis) == {(2, -1, 0), (3, 0, -1)}


def test_full_rank_has_empty_basis():
    ns = nullspace([[1, 0], [0, 1]], 2)
    assert ns.dimension == 0 and ns.basis == ()


def test_primitive_vector():
    assert primitive_vector([Fraction(-1, 2), Fraction(1, 3), 0]) == (3, -2, 0)
    with pytest.raises(ValueError):
        primitive_vector([0, 0])


def test_ragged_rejected():
    with pytest.raises(ValueError):
        nullspace([[1, 2], [1]], 2)
