import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cat0_classify import (
    PRESETS,
    CrystallographicGroup,
    EuclideanIsometry,
    TreeAutomorphism,
    classify,
    line_stabilizer_image,
    preset,
)
from cat0_classify.isometries import apply_to_line, axes_of, line_action
from cat0_classify.lines import canonical_direction, euclidean_line
from cat0_classify.spaces import EuclideanSpace

WALLPAPER = ["p1", "p2", "pm", "pg", "cm", "pmm", "p4", "p3", "p6"]


@pytest.mark.parametrize("name", WALLPAPER)
def test_generators_are_isometries(name):
    G = preset(name)
    for g in G.generators:
        assert g.is_orthogonal(G.space.gram)
        assert G.contains(g)


@pytest.mark.parametrize("name", WALLPAPER)
def test_enumeration_is_closed_under_inverse(name):
    G = preset(name)
    o = G.space.origin()
    els = G.enumerate(2, o)
    keys = {(g.matrix, g.translation) for g in els}
    for g in els:
        h = g.inverse()
        assert (h.matrix, h.translation) in keys
        assert G.space.distance(g(o), o) <= 2
    assert G.enumerate(2, o) == els


def test_point_group_orders():
    # wallpaper point groups: |p1|=1, |p2|=2, |pmm|=4, |p4|=4, |p3|=3, |p6|=6
    expected = {"p1": 1, "p2": 2, "pm": 2, "pg": 2, "cm": 2, "pmm": 4, "p4": 4, "p3": 3, "p6": 6}
    for name, n in expected.items():
        assert len(preset(name).point_group) == n


def test_unknown_preset():
    with pytest.raises(ValueError):
        preset("p31m")
    assert "tree-odometer" in PRESETS


def test_classify_glide_and_rotation():
    G = preset("pg")
    glide = G.generators[2]
    c = classify(G, glide)
    assert c.kind == "hyperbolic"
    assert c.translation_length == Fraction(1, 2)
    assert c.axis.direction == canonical_direction((1, 0))
    rot = preset("p2").point_group[1]
    r = EuclideanIsometry.make(rot[0], (1, 0))
    c = classify(preset("p2"), r)
    assert c.elliptic and r(c.fixed_point) == c.fixed_point


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(WALLPAPER), st.integers(0, 10**6))
def test_hyperbolic_axis_is_translated(name, seed):
    G = preset(name)
    els = G.enumerate(3, G.space.origin())
    g = random.Random(seed).choice(els)
    c = classify(G, g)
    if c.kind == "hyperbolic":
        act = line_action(G.space, g, c.axis)
        assert act is not None and act[0] == 1 and act[1] != 0
        assert c.translation_length.sq == act[1] ** 2 * G.space.norm_sq(c.axis.direction)
    else:
        assert g(c.fixed_point) == c.fixed_point


def test_odometer_orbits_and_periods():
    phi = TreeAutomorphism.odometer()
    for n in range(0, 11):
        start = "0" * n
        orbit = {start}
        a = phi.map_address(start)
        while a != start:
            orbit.add(a)
            a = phi.map_address(a)
        assert len(orbit) == 2**n
        assert phi.period(start) == 2**n


def test_odometer_powers_fix_levels():
    G = preset("tree-odometer", depth=6)
    g = G.power(8)
    axes = axes_of(G, g)
    # phi^8 fixes every node of level <= 3 and nothing deeper
    assert {len(line.anchor.address) for line in axes} == {0, 1, 2, 3}


def test_tree_table_must_commute_with_parent_map():
    with pytest.raises(ValueError):
        TreeAutomorphism(table=(0, 2, 1, 3))
    t = TreeAutomorphism(table=(1, 0, 3, 2))
    assert (t * t.inverse()).map_address("01") == "01"


def test_stabiliser_of_mirror_line_is_dihedral():
    G = preset("pmm")
    line = euclidean_line(G.space, G.space.origin(), (1, 0))
    assert line_stabilizer_image(G, line, 2).kind == "infinite-dihedral"
    P = preset("p1")
    assert line_stabilizer_image(P, line, 2).kind == "infinite-cyclic"


def test_from_generators_builds_group():
    E = EuclideanSpace(2)
    G = CrystallographicGroup.from_generators(E, ((1, 0), (0, 1)), [EuclideanIsometry.make(((1, 0), (0, -1)), (Fraction(1, 2), 0))])
    assert len(G.point_group) == 2
    assert G.contains(EuclideanIsometry.translation_by((1, 0)))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["p2", "pm", "pg", "pmm", "p4"]), st.integers(0, 10**6))
def test_line_image_is_a_line_of_the_same_length_class(name, seed):
    G = preset(name)
    rng = random.Random(seed)
    els = G.enumerate(2, G.space.origin())
    g, h = rng.choice(els), rng.choice(els)
    line = euclidean_line(G.space, G.space.point(rng.randint(-2, 2), rng.randint(-2, 2)), (1, rng.randint(-2, 2)))
    assert apply_to_line(G.space, g * h, line) == apply_to_line(G.space, g, apply_to_line(G.space, h, line))
