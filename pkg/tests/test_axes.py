import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cat0_classify import axes_space, directed_double, induced_group, preset, well_behaved_check
from cat0_classify.axes import DirectedPoint, FULL, Subtree, enumerate_axes, induced_isometry
from cat0_classify.isometries import apply_to_line, classify
from cat0_classify.lines import canonical_direction
from cat0_classify.spaces import DomainError


def test_enumerated_axes_of_p1():
    A = axes_space(preset("p1"), "enumerated", 1)
    assert sorted(A.directions()) == sorted([canonical_direction((0, 1)), canonical_direction((1, 0))])
    assert all(c.members == FULL for c in A.classes)


def test_point_group_closes_directions():
    A = axes_space(preset("p4"), "enumerated", 1)
    dirs = set(A.directions())
    G = preset("p4")
    for o, _ in G.point_group:
        for d in dirs:
            img = tuple(sum(o[i][j] * d[j] for j in range(2)) for i in range(2))
            assert A.class_index(img) is not None or A.class_index(tuple(-x for x in img)) is not None


def test_larger_bound_finds_diagonal_classes():
    assert len(axes_space(preset("p1"), "enumerated", 2)) == 4


@pytest.mark.parametrize("name", ["p1", "p2", "pm", "pg", "cm", "pmm", "p4"])
def test_euclidean_axes_are_well_behaved(name):
    G = preset(name)
    A = axes_space(G, "enumerated", 1)
    assert well_behaved_check(A, G, 1).ok


def test_tree_axes_closure_flags():
    G = preset("tree-odometer")
    bad = well_behaved_check(axes_space(G, "enumerated", 2**12), G, 2**12)
    assert not bad.closed_at_scale
    assert bad.witnesses["closed_at_scale"]["distance"] == "1/4096"
    good = well_behaved_check(axes_space(G, "root", 1), G, 1)
    assert good.ok and good.failing() == []


def test_tree_enumerated_levels_follow_two_adic_valuation():
    G = preset("tree-odometer", depth=8)
    assert enumerate_axes(G, 4).classes[0].members == Subtree(2)
    assert enumerate_axes(G, 7).classes[0].members == Subtree(2)
    assert enumerate_axes(G, 8).classes[0].members == Subtree(3)


def test_root_choice_is_tree_only():
    with pytest.raises(DomainError):
        axes_space(preset("p1"), "root", 1)
    with pytest.raises(ValueError):
        axes_space(preset("p1"), "bogus", 1)


def test_induced_group_of_glide_class_has_half_lattice():
    G = preset("pg")
    A = axes_space(G, "enumerated", 1)
    vertical = [c for c in A.classes if c.direction[0] == 0][0]
    H = induced_group(G, vertical.pclass)
    assert H.lattice == ((Fraction(1, 2),),)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["p2", "pm", "pg", "cm", "pmm"]), st.integers(0, 10**6))
def test_induced_isometries_lie_in_induced_group(name, seed):
    G = preset(name)
    A = axes_space(G, "enumerated", 1)
    rng = random.Random(seed)
    c = rng.choice(A.classes)
    H = induced_group(G, c.pclass)
    g = rng.choice(G.enumerate(3, G.space.origin()))
    img = induced_isometry(c.pclass, g)
    if img is not None:
        assert H.contains(img)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["pm", "pg", "pmm", "p4"]), st.integers(0, 10**6))
def test_directed_action_commutes_with_sheet_swap(name, seed):
    G = preset(name)
    DA = directed_double(axes_space(G, "enumerated", 1))
    rng = random.Random(seed)
    k = rng.randrange(len(DA.axes.classes))
    bs = DA.axes.classes[k].pclass.base_space
    p = DirectedPoint(k, bs.point(Fraction(rng.randint(-8, 8), 4)), rng.choice((1, -1)))
    g = rng.choice(G.enumerate(2, G.space.origin()))
    assert DA.act(g, DA.involution(p)) == DA.involution(DA.act(g, p))
    assert DA.distance(p, DA.involution(p)) == float("inf")


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["pm", "pg", "pmm"]), st.integers(0, 10**6))
def test_glide_reflections_flip_sheets(name, seed):
    G = preset(name)
    DA = directed_double(axes_space(G, "enumerated", 1))
    for g in G.enumerate(1, G.space.origin()):
        c = classify(G, g)
        if c.kind == "hyperbolic" and g.matrix != ((1, 0), (0, 1)):
            k = DA.axes.class_index(c.axis.direction)
            # a glide translates its own axis, preserving orientation
            assert DA.sign_action(g, k) == (k, False)
            assert apply_to_line(G.space, g, c.axis) == c.axis
