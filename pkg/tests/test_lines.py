import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cat0_classify import flat_strip_distance, parallel_class, preset
from cat0_classify.isometries import apply_to_line
from cat0_classify.lines import (
    DirectedLine,
    Line,
    are_parallel,
    canonical_direction,
    check_line,
    euclidean_line,
    line_point,
    vertical_line,
)
from cat0_classify.spaces import DomainError, EuclideanSpace, ProductSpace, TreeSpace

coords = st.fractions(min_value=-3, max_value=3, max_denominator=8)
small = st.integers(-3, 3)


def _strip_oracle(space, l1, l2):
    # squared distance from a point of l2 to l1 via orthogonal projection
    d = l1.direction
    w = tuple(a - b for a, b in zip(l2.anchor, l1.anchor))
    return space.inner(w, w) - space.inner(w, d) ** 2 / space.inner(d, d)


def test_canonical_direction_is_sign_and_scale_free():
    assert canonical_direction((2, 4)) == canonical_direction((-1, -2))
    assert canonical_direction((Fraction(1, 2), 0)) == canonical_direction((3, 0))


def test_line_value_does_not_depend_on_point_or_orientation():
    E = EuclideanSpace(2)
    a = euclidean_line(E, E.point(0, 1), (1, 1))
    b = euclidean_line(E, E.point(3, 4), (-2, -2))
    assert a == b


@settings(max_examples=100, deadline=None)
@given(coords, coords, coords, coords, small, small)
def test_flat_strip_distance_matches_projection(x1, y1, x2, y2, a, b):
    if a == b == 0:
        return
    E = EuclideanSpace(2, ((2, 1), (1, 2)))
    l1 = euclidean_line(E, E.point(x1, y1), (a, b))
    l2 = euclidean_line(E, E.point(x2, y2), (a, b))
    assert flat_strip_distance(E, l1, l2).sq == _strip_oracle(E, l1, l2)
    assert parallel_class(E, l1).base_distance(l1, l2) == flat_strip_distance(E, l1, l2)


def test_non_parallel_lines_are_infinitely_far():
    E = EuclideanSpace(2)
    l1 = euclidean_line(E, E.origin(), (1, 0))
    l2 = euclidean_line(E, E.origin(), (0, 1))
    assert not are_parallel(E, l1, l2)
    assert flat_strip_distance(E, l1, l2) == math.inf


def test_vertical_lines_use_tree_distance():
    X = ProductSpace(TreeSpace(6))
    l1 = vertical_line(X, X.tree.node("0"))
    l2 = vertical_line(X, X.tree.node("1"))
    assert flat_strip_distance(X, l1, l2) == 1
    pc = parallel_class(X, l1)
    assert pc.to_base(l2) == X.tree.node("1")
    assert pc.from_base(X.tree.node("1")) == l2


def test_base_identification_round_trip():
    E = EuclideanSpace(3)
    pc = parallel_class(E, euclidean_line(E, E.origin(), (1, 1, 0)))
    line = euclidean_line(E, E.point(1, 2, 3), (1, 1, 0))
    assert pc.from_base(pc.to_base(line)) == line
    with pytest.raises(DomainError):
        pc.to_base(euclidean_line(E, E.origin(), (1, 0, 0)))


def test_line_checks():
    E = EuclideanSpace(2)
    with pytest.raises(DomainError):
        check_line(E, Line(E.origin(), (1, 0, 0)))
    with pytest.raises(ValueError):
        DirectedLine(euclidean_line(E, E.origin(), (1, 0)), 0)
    line = euclidean_line(E, E.origin(), (1, 2))
    assert line_point(E, line, 2) == tuple(2 * x for x in line.direction)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["p2", "pm", "pg", "cm", "pmm", "p4", "p6"]), st.integers(0, 10**6))
def test_isometries_preserve_flat_strip_distance(name, seed):
    G = preset(name)
    E = G.space
    rng = random.Random(seed)
    g = rng.choice(G.enumerate(2, E.origin()))
    d = (rng.randint(-2, 2), rng.randint(1, 2))
    l1 = euclidean_line(E, E.point(rng.randint(-4, 4), rng.randint(-4, 4)), d)
    l2 = euclidean_line(E, E.point(rng.randint(-4, 4), rng.randint(-4, 4)), d)
    assert flat_strip_distance(E, apply_to_line(E, g, l1), apply_to_line(E, g, l2)) == flat_strip_distance(E, l1, l2)
