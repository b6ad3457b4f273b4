from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cat0_classify.spaces import (
    Ball,
    DomainError,
    EuclideanSpace,
    ProductPoint,
    ProductSpace,
    TreePoint,
    TreeSpace,
    balls_intersect,
    cat0_triangle_check,
    distance,
    geodesic_point,
)
from oracles import min_max_power, tree_distance

coords = st.fractions(min_value=-4, max_value=4, max_denominator=16)
radii = st.fractions(min_value=Fraction(1, 16), max_value=3, max_denominator=16)
addresses = st.text(alphabet="01", max_size=8)


def test_euclidean_distance_exact():
    E = EuclideanSpace(2)
    assert distance(E, E.point(0, 0), E.point(3, 4)) == 5
    assert distance(E, E.point(0, 0), E.point(1, 1)).sq == 2


def test_hex_gram_distance():
    E = EuclideanSpace(2, ((1, Fraction(-1, 2)), (Fraction(-1, 2), 1)))
    # e1 + e2 has length 1 in the hexagonal metric
    assert distance(E, E.point(0, 0), E.point(1, 1)) == 1


def test_gram_must_be_positive_definite():
    with pytest.raises(ValueError):
        EuclideanSpace(2, ((1, 2), (2, 1)))
    with pytest.raises(ValueError):
        EuclideanSpace(2, ((1, 0), (1, 1)))


def test_tree_metric_levels():
    T = TreeSpace(12)
    for n in range(1, 13):
        assert T.edge_length(n) == Fraction(1, 2**n)
    assert distance(T, T.root(), T.boundary("0" * 12)) == 1


@given(addresses, addresses)
def test_tree_distance_matches_oracle(a, b):
    T = TreeSpace(8)
    d = T.distance_q(T.node(a), T.node(b))
    assert float(d) == pytest.approx(tree_distance(a, b), abs=1e-12)


@given(addresses, addresses, st.fractions(min_value=0, max_value=1, max_denominator=8))
def test_tree_geodesic_splits_distance(a, b, t):
    T = TreeSpace(8)
    p, q = T.node(a), T.node(b)
    x = geodesic_point(T, p, q, t)
    d = T.distance_q(p, q)
    assert T.distance_q(p, x) == t * d
    assert T.distance_q(x, q) == (1 - t) * d


def test_tree_rejects_bad_points():
    T = TreeSpace(4)
    with pytest.raises(DomainError):
        T.node("012")
    with pytest.raises(DomainError):
        T.check_point(TreePoint("0", Fraction(1)))
    with pytest.raises(DomainError):
        TreeSpace(4, compactified=False).boundary("0000")


def test_product_distance():
    X = ProductSpace(TreeSpace(6))
    p = ProductPoint(X.tree.root(), Fraction(0))
    q = ProductPoint(X.tree.node("1"), Fraction(1))
    # tree part 1/2, line part 1
    assert distance(X, p, q).sq == Fraction(5, 4)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(coords, coords, radii), min_size=1, max_size=4))
def test_ball_intersection_matches_float_oracle(data):
    E = EuclideanSpace(2)
    balls = [Ball((x, y), r * r) for x, y, r in data]
    val = min_max_power([(float(x), float(y)) for x, y, _ in data], [r * r for _, _, r in data])
    if abs(val) > 1e-7:
        assert balls_intersect(E, balls) == (val < 0)


def test_tangent_open_balls_miss_and_closed_meet():
    E = EuclideanSpace(2)
    a, b = E.point(0, 0), E.point(2, 0)
    assert not balls_intersect(E, [Ball(a, Fraction(1)), Ball(b, Fraction(1))])
    assert balls_intersect(E, [Ball(a, Fraction(1), True), Ball(b, Fraction(1), True)])


@given(addresses, addresses, st.fractions(min_value=Fraction(1, 64), max_value=1, max_denominator=64),
       st.fractions(min_value=Fraction(1, 64), max_value=1, max_denominator=64))
def test_tree_balls_pairwise(a, b, r, s):
    T = TreeSpace(8)
    p, q = T.node(a), T.node(b)
    expected = T.distance_q(p, q) < r + s
    assert balls_intersect(T, [Ball(p, r * r), Ball(q, s * s)]) == expected


@settings(max_examples=30, deadline=None)
@given(st.tuples(coords, coords), st.tuples(coords, coords), st.tuples(coords, coords), st.integers(0, 100))
def test_euclidean_triangles_are_cat0(p, q, r, seed):
    E = EuclideanSpace(2)
    assert cat0_triangle_check(E, E.point(p), E.point(q), E.point(r), samples=8, seed=seed).passed


@settings(max_examples=30, deadline=None)
@given(addresses, addresses, addresses, st.integers(0, 100))
def test_tree_triangles_are_cat0(a, b, c, seed):
    T = TreeSpace(8)
    assert cat0_triangle_check(T, T.node(a), T.node(b), T.node(c), samples=8, seed=seed).passed


def test_geodesic_parameter_range():
    with pytest.raises(ValueError):
        E = EuclideanSpace(2)
        geodesic_point(E, E.point(0, 0), E.point(1, 0), Fraction(2))
