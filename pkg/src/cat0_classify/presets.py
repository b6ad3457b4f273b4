"""Named groups: the planar crystallographic presets and the tree odometer."""

from __future__ import annotations

from fractions import Fraction

from .isometries import CrystallographicGroup, OdometerGroup
from .spaces import EuclideanSpace, ProductSpace, TreeSpace

HALF = Fraction(1, 2)
HEX_GRAM = ((Fraction(1), -HALF), (-HALF, Fraction(1)))

I2 = ((1, 0), (0, 1))
NEG = ((-1, 0), (0, -1))
MIRROR_X = ((1, 0), (0, -1))  # fixes the x-axis
MIRROR_Y = ((-1, 0), (0, 1))
ROT4 = ((0, -1), (1, 0))
ROT3_HEX = ((0, -1), (1, -1))
ROT6_HEX = ((1, -1), (1, 0))


def _powers(m):
    from .exact import identity, matmul, to_matrix

    m = to_matrix(m)
    out = [identity(len(m))]
    cur = m
    while cur != out[0]:
        out.append(cur)
        cur = matmul(cur, m)
    return out


def _square(name, point_group, lattice=I2):
    return CrystallographicGroup(EuclideanSpace(2), lattice, point_group, name)


def _hex(name, rotation):
    space = EuclideanSpace(2, HEX_GRAM)
    return CrystallographicGroup(space, I2, [(o, (0, 0)) for o in _powers(rotation)], name)


def p1():
    return _square("p1", [(I2, (0, 0))])


def p2():
    return _square("p2", [(I2, (0, 0)), (NEG, (0, 0))])


def pm():
    return _square("pm", [(I2, (0, 0)), (MIRROR_X, (0, 0))])


def pg():
    return _square("pg", [(I2, (0, 0)), (MIRROR_X, (HALF, 0))])


def cm():
    return _square("cm", [(I2, (0, 0)), (MIRROR_X, (0, 0))], lattice=((1, HALF), (0, HALF)))


def pmm():
    return _square("pmm", [(I2, (0, 0)), (NEG, (0, 0)), (MIRROR_X, (0, 0)), (MIRROR_Y, (0, 0))])


def p4():
    return _square("p4", [(o, (0, 0)) for o in _powers(ROT4)])


def p3():
    return _hex("p3", ROT3_HEX)


def p6():
    return _hex("p6", ROT6_HEX)


def tree_odometer(depth: int = 12):
    return OdometerGroup(ProductSpace(TreeSpace(depth)))


PRESETS = {
    "p1": p1,
    "p2": p2,
    "pm": pm,
    "pg": pg,
    "cm": cm,
    "pmm": pmm,
    "p4": p4,
    "p3": p3,
    "p6": p6,
    "tree-odometer": tree_odometer,
}


def preset(name: str, depth: int = 12):
    """Build a preset group by name."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown group preset {name!r}; choose from {sorted(PRESETS)}") from None
    if name == "tree-odometer":
        return factory(depth)
    return factory()
