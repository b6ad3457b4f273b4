import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cat0_classify.exact import (
    IntFrame,
    Length,
    exact_sqrt,
    frac,
    integer_row_basis,
    inverse,
    matmul,
    identity,
    nullspace,
    primitive_integer,
    rank,
    solve,
    sqrt_le_sum,
    sqrt_lt_sum,
    sqrt_sum_lt,
)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=64)
nonneg = st.fractions(min_value=0, max_value=50, max_denominator=64)


def test_frac_rejects_floats():
    with pytest.raises(TypeError):
        frac(0.5)
    assert frac("3/4") == Fraction(3, 4)


def test_exact_sqrt():
    assert exact_sqrt(Fraction(9, 16)) == Fraction(3, 4)
    assert exact_sqrt(Fraction(2)) is None


def test_length_compares_exactly():
    assert Length(2) < Length.of(Fraction(3, 2))
    assert Length(Fraction(1, 4)) == Fraction(1, 2)
    assert Length(2) > Fraction(141, 100)
    assert Length(2) < math.inf
    assert repr(Length(2)) == "Length(sqrt(2))"


@given(nonneg, nonneg, nonneg)
def test_sqrt_sum_lt_matches_float(a, b, r):
    lhs = math.sqrt(a) + math.sqrt(b)
    if abs(lhs - float(r)) > 1e-9:
        assert sqrt_sum_lt(a, b, r) == (lhs < r)


@given(nonneg, nonneg, nonneg)
def test_sqrt_lt_sum_matches_float(c, a, b):
    rhs = math.sqrt(a) + math.sqrt(b)
    if abs(math.sqrt(c) - rhs) > 1e-9:
        assert sqrt_lt_sum(c, a, b) == (math.sqrt(c) < rhs)


@given(nonneg, nonneg, nonneg)
def test_sqrt_le_sum_matches_float(a, r, b):
    rhs = float(r) + math.sqrt(b)
    if abs(math.sqrt(a) - rhs) > 1e-9:
        assert sqrt_le_sum(a, r, b) == (math.sqrt(a) <= rhs)


@given(st.lists(st.lists(fractions, min_size=3, max_size=3), min_size=3, max_size=3), st.lists(fractions, min_size=3, max_size=3))
def test_solve_satisfies_system(a, b):
    x = solve(a, b)
    if rank(a) == 3:
        assert [sum(ai * xi for ai, xi in zip(row, x)) for row in a] == b
        assert matmul(a, inverse(a)) == identity(3)


def test_nullspace_and_primitive():
    ker = nullspace([[1, 2, 3]], 3)
    assert len(ker) == 2
    for v in ker:
        assert v[0] + 2 * v[1] + 3 * v[2] == 0
    assert primitive_integer((Fraction(1, 2), Fraction(-3, 4))) == (2, -3)


def test_integer_row_basis_reduces_generators():
    basis = integer_row_basis([(2, 0), (0, 3), (2, 3), (4, 6)])
    assert len(basis) == 2
    # the lattice has index 6 in Z^2
    (a, b), (c, d) = basis
    assert abs(a * d - b * c) == 6


def test_int_frame_distances():
    f = IntFrame(((1, 0), (0, 1)), [4, 8])
    p, q = f.point((Fraction(1, 4), Fraction(1, 2))), f.point((0, Fraction(3, 8)))
    # |(1/4, 1/8)|^2 = 5/64
    assert f.below(f.dist2(p, q), Fraction(5, 64), allow_equal=True)
    assert not f.below(f.dist2(p, q), Fraction(5, 64))
