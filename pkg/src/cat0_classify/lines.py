"""Geodesic lines, directed lines and the flat-strip metric on lines."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exact import ZERO, gram_dot, integer_row_basis, matvec, nullspace, primitive_integer, solve, vadd, vscale, vsub
from .spaces import DomainError, EuclideanSpace, ProductPoint, ProductSpace, TreePoint

VERTICAL = "vertical"


def canonical_direction(v) -> tuple:
    """Primitive integer direction, signed so that it is the lexicographically
    least of ``{v, -v}``; this sign is the canonical ``+`` orientation."""
    p = primitive_integer(v)
    neg = tuple(-x for x in p)
    return min(p, neg)


@dataclass(frozen=True, order=True)
class Line:
    """An unoriented geodesic line.

    Euclidean lines store the point nearest the origin and a canonical
    primitive direction, so equal point sets give equal values. Lines of
    ``T x R`` are all vertical and store their tree point.
    """

    anchor: object
    direction: object

    @property
    def vertical(self) -> bool:
        return self.direction == VERTICAL


@dataclass(frozen=True, order=True)
class DirectedLine:
    line: Line
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("orientation sign must be +1 or -1")

    def reversed(self) -> "DirectedLine":
        return DirectedLine(self.line, -self.sign)


def euclidean_line(space: EuclideanSpace, point, direction) -> Line:
    space.check_point(point)
    d = canonical_direction(direction)
    dd = space.inner(d, d)
    anchor = vsub(point, vscale(space.inner(point, d) / dd, d))
    return Line(anchor, d)


def vertical_line(space: ProductSpace, x: TreePoint) -> Line:
    space.tree.check_point(x)
    return Line(x, VERTICAL)


def line_point(space, line: Line, s) -> object:
    """Point of the line at parameter ``s`` (in units of the direction vector)."""
    if line.vertical:
        return ProductPoint(line.anchor, Fraction(s))
    return vadd(line.anchor, vscale(Fraction(s), line.direction))


def check_line(space, line: Line) -> Line:
    if isinstance(space, EuclideanSpace):
        if line.vertical or len(line.direction) != space.dim:
            raise DomainError(f"{line!r} is not a line of {space!r}")
        return line
    if isinstance(space, ProductSpace):
        if not line.vertical:
            raise DomainError("lines of T x R are vertical")
        space.tree.check_point(line.anchor)
        return line
    raise DomainError(f"{space!r} has no lines")


def are_parallel(space, l1: Line, l2: Line) -> bool:
    check_line(space, l1)
    check_line(space, l2)
    return l1.direction == l2.direction


def flat_strip_distance(space, l1: Line, l2: Line):
    """Width of the flat strip bounded by parallel lines; ``math.inf`` otherwise."""
    if not are_parallel(space, l1, l2):
        return math.inf
    if l1.vertical:
        return space.tree.distance(l1.anchor, l2.anchor)
    return space.distance(l1.anchor, l2.anchor)


# ---------------------------------------------------------------------------
# parallel classes


class ParallelClass:
    """Lines parallel to a representative, identified with points of ``X_c^0``.

    For Euclidean space ``X_c^0`` is the hyperplane orthogonal to the
    direction through the origin, given an integer basis and carried as a
    lower-dimensional :class:`EuclideanSpace`. For ``T x R`` it is the tree.
    """

    def __init__(self, space, representative: Line):
        check_line(space, representative)
        self.space = space
        self.representative = representative
        self.direction = representative.direction
        if representative.vertical:
            self.basis = None
            self.base_space = space.tree
        else:
            d = self.direction
            n = space.dim
            gd = matvec(space.gram, d)
            # integer basis of the orthogonal complement of d
            comp = nullspace([gd], n)
            basis = [primitive_integer(v) for v in comp]
            basis = integer_row_basis(basis) if len(basis) > 1 else basis
            self.basis = tuple(basis)
            if n == 1:
                raise DomainError("lines in E^1 have a single parallel class with a point base")
            gram = tuple(tuple(space.inner(u, v) for v in self.basis) for u in self.basis)
            self.base_space = EuclideanSpace(n - 1, gram)
        self.key = ("class", self.direction)

    def __repr__(self):
        return f"ParallelClass({self.direction})"

    def contains(self, line: Line) -> bool:
        return line.direction == self.direction

    def to_base(self, line: Line):
        """The point of ``X_c^0`` corresponding to a parallel line."""
        if not self.contains(line):
            raise DomainError("line is not in this parallel class")
        if line.vertical:
            return line.anchor
        b = self.basis
        g = self.space.gram
        m = [[gram_dot(g, u, v) for v in b] for u in b]
        rhs = [gram_dot(g, u, line.anchor) for u in b]
        return tuple(solve(m, rhs))

    def from_base(self, y) -> Line:
        if self.direction == VERTICAL:
            return Line(y, VERTICAL)
        x = tuple(sum((yi * bi[k] for yi, bi in zip(y, self.basis)), ZERO) for k in range(self.space.dim))
        return euclidean_line(self.space, x, self.direction)

    def base_distance(self, l1: Line, l2: Line):
        return self.base_space.distance(self.to_base(l1), self.to_base(l2))


def parallel_class(space, c: Line) -> ParallelClass:
    """The class of lines parallel to ``c`` with its base ``X_c^0``."""
    return ParallelClass(space, c)
