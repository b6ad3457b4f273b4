"""The space of axes, well-behavedness at scale and the directed double cover."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import frac, integer_row_basis, matvec, transpose
from .isometries import (
    CrystallographicGroup,
    EuclideanIsometry,
    classify,
)
from .lines import VERTICAL, Line, canonical_direction, euclidean_line, vertical_line, ParallelClass
from .spaces import DomainError, EuclideanSpace, ProductSpace, TreePoint, node_depth

FULL = "full"


@dataclass(frozen=True)
class Subtree:
    """All points of the tree at level at most ``max_level`` (the root for 0)."""

    max_level: int

    def contains(self, tree, p: TreePoint) -> bool:
        return not p.tail and len(p.address) <= self.max_level


@dataclass
class AxisClass:
    pclass: ParallelClass
    members: object  # FULL or Subtree
    witnesses: list = field(default_factory=list)

    @property
    def direction(self):
        return self.pclass.direction

    def contains_base(self, y) -> bool:
        if self.members == FULL:
            return True
        return self.members.contains(self.pclass.base_space, y)

    def contains(self, line: Line) -> bool:
        return self.pclass.contains(line) and self.contains_base(self.pclass.to_base(line))


class AxesSpace:
    """Axes grouped into parallel classes.

    Euclidean classes are stored intensionally: every axis-bearing class of a
    crystallographic group is all of ``X_c^0`` (a power of any hyperbolic
    element is a translation, and a translation has every parallel line as an
    axis). Classes of ``T x R`` store the subtree of base points.
    """

    def __init__(self, space, group, classes, choice: str, bound):
        self.space = space
        self.group = group
        self.classes = sorted(classes, key=lambda c: _dir_key(c.direction))
        self.choice = choice
        self.bound = frac(bound)
        self._index = {c.direction: i for i, c in enumerate(self.classes)}

    def __repr__(self):
        return f"AxesSpace({self.choice!r}, classes={[c.direction for c in self.classes]})"

    def __len__(self):
        return len(self.classes)

    @property
    def is_empty(self) -> bool:
        return not self.classes

    def class_index(self, direction) -> int | None:
        return self._index.get(direction)

    def contains(self, line: Line) -> bool:
        i = self._index.get(line.direction)
        return i is not None and self.classes[i].contains(line)

    def directions(self) -> list:
        return [c.direction for c in self.classes]


def _dir_key(d):
    return (0,) if d == VERTICAL else (1,) + tuple(d)


def _point_group_closure(group: CrystallographicGroup, directions):
    out = set(directions)
    frontier = list(directions)
    while frontier:
        d = frontier.pop()
        for o, _ in group.point_group:
            e = canonical_direction(matvec(o, d))
            if e not in out:
                out.add(e)
                frontier.append(e)
    return out


def enumerate_axes(group, bound) -> AxesSpace:
    """Axes of hyperbolic elements in the displacement window, by class."""
    bound = frac(bound)
    if bound <= 0:
        raise ValueError("axes bound must be positive")
    space = group.space
    elements = group.enumerate(bound, space.origin())
    if isinstance(space, EuclideanSpace):
        found: dict = {}
        for g in elements:
            cls = classify(group, g)
            if cls.kind == "hyperbolic":
                found.setdefault(cls.axis.direction, []).append(g)
        dirs = _point_group_closure(group, found) if found else set()
        classes = []
        for d in dirs:
            pc = ParallelClass(space, euclidean_line(space, space.origin(), d))
            classes.append(AxisClass(pc, FULL, found.get(d, [])))
        return AxesSpace(space, group, classes, "enumerated", bound)
    if isinstance(space, ProductSpace):
        level = -1
        witnesses = []
        for g in elements:
            if g.shift != 0:
                k = abs(int(g.shift))
                v2 = (k & -k).bit_length() - 1
                level = max(level, min(v2, space.tree.depth))
                witnesses.append(g)
        if level < 0:
            return AxesSpace(space, group, [], "enumerated", bound)
        pc = ParallelClass(space, vertical_line(space, space.tree.root()))
        return AxesSpace(space, group, [AxisClass(pc, Subtree(level), witnesses)], "enumerated", bound)
    raise DomainError(f"no axes in {space!r}")


def axes_space(group, choice: str, bound) -> AxesSpace:
    """``full`` (the axes space itself), ``enumerated`` (window axes) or ``root``."""
    space = group.space
    if choice == "enumerated":
        return enumerate_axes(group, bound)
    if choice == FULL:
        a = enumerate_axes(group, bound)
        if isinstance(space, ProductSpace) and a.classes:
            c = a.classes[0]
            a = AxesSpace(space, group, [AxisClass(c.pclass, Subtree(space.tree.depth), c.witnesses)], FULL, bound)
        a.choice = FULL
        return a
    if choice == "root":
        if not isinstance(space, ProductSpace):
            raise DomainError("the 'root' axes choice applies to the tree product only")
        a = enumerate_axes(group, bound)
        witnesses = a.classes[0].witnesses if a.classes else []
        pc = ParallelClass(space, vertical_line(space, space.tree.root()))
        return AxesSpace(space, group, [AxisClass(pc, Subtree(0), witnesses)], "root", bound)
    raise ValueError(f"unknown axes choice {choice!r}")


# ---------------------------------------------------------------------------
# well-behavedness


@dataclass
class WellBehavedReport:
    closed_at_scale: bool
    componentwise_convex: bool
    invariant: bool
    meets_components: bool
    resolution: Fraction
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.closed_at_scale and self.componentwise_convex and self.invariant and self.meets_components

    def failing(self) -> list:
        names = ("closed_at_scale", "componentwise_convex", "invariant", "meets_components")
        return [n for n in names if not getattr(self, n)]

    def as_dict(self) -> dict:
        return {
            "closed_at_scale": self.closed_at_scale,
            "componentwise_convex": self.componentwise_convex,
            "invariant": self.invariant,
            "meets_components": self.meets_components,
            "resolution": str(self.resolution),
            "witnesses": self.witnesses,
        }


def _random_base_point(rng, dim):
    return tuple(Fraction(rng.randint(-48, 48), 16) for _ in range(dim))


def _random_tree_point(rng, tree, level):
    n = rng.randint(0, level)
    address = "".join(rng.choice("01") for _ in range(n))
    if n == 0:
        return tree.root()
    offset = tree.edge_length(n) * Fraction(rng.randint(1, 8), 8)
    return TreePoint(address, offset, False)


def well_behaved_check(A: AxesSpace, group, bound, seed: int = 0, samples: int = 64) -> WellBehavedReport:
    """Certify the four well-behavedness conditions within the window."""
    if A.is_empty:
        raise ValueError("axes space is empty")
    space = A.space
    rng = random.Random(seed)
    wit: dict = {}
    if isinstance(space, ProductSpace):
        tree = space.tree
        resolution = Fraction(1, 2 ** tree.depth)
        sub = A.classes[0].members
        m = sub.max_level
        # invariance: level-preserving generators keep the subtree
        invariant = True
        for g in group.generators:
            for p in tree.nodes(min(m, 6)):
                if not sub.contains(tree, g.tree(p)):
                    invariant = False
                    wit["invariant"] = f"{p} leaves A"
        convex = True
        for _ in range(samples):
            p, q = _random_tree_point(rng, tree, m), _random_tree_point(rng, tree, m)
            for k in range(17):
                x = tree.geodesic_point(p, q, Fraction(k, 16))
                if not sub.contains(tree, x):
                    convex = False
                    wit["componentwise_convex"] = f"geodesic {p}..{q} leaves A"
        # closed at scale: non-member discretisation points within the resolution
        closed = True
        base = node_depth(m)
        candidates = []
        if m < tree.depth:
            candidates = [tree.node(p.address) for p in tree.nodes(m + 1) if p.level == m + 1]
        else:
            candidates = [tree.boundary(p.address) for p in tree.nodes(m) if p.level == m]
        for p in candidates:
            d = tree.point_depth(p) - base
            if d <= resolution:
                closed = False
                wit["closed_at_scale"] = {
                    "non_axis_line": _tree_label(p),
                    "nearest_axis": _tree_label(tree.node(p.address[:m])),
                    "distance": str(d),
                }
                break
        meets = bool(A.classes)
        return WellBehavedReport(closed, convex, invariant, meets, resolution, wit)
    if not isinstance(space, EuclideanSpace):
        raise DomainError(f"no axes in {space!r}")
    resolution = Fraction(0)
    dirs = set(A.directions())
    invariant = True
    for g in group.generators:
        for d in dirs:
            e = canonical_direction(g.apply_direction(d))
            if e not in dirs:
                invariant = False
                wit["invariant"] = f"{d} maps to {e}"
    # every class is all of X_c^0, so class-point geodesics stay inside
    convex = True
    for c in A.classes:
        bs = c.pclass.base_space
        for _ in range(max(1, samples // max(1, len(A.classes)))):
            y1, y2 = _random_base_point(rng, bs.dim), _random_base_point(rng, bs.dim)
            mid = bs.geodesic_point(y1, y2, Fraction(rng.randint(0, 16), 16))
            if not c.contains_base(mid):
                convex = False
    # non-member lines are non-parallel to every member: infinite distance
    closed = True
    for _ in range(samples):
        v = (rng.randint(-4, 4), rng.randint(-4, 4)) + tuple(rng.randint(-4, 4) for _ in range(space.dim - 2))
        if not any(v):
            continue
        line = euclidean_line(space, _random_base_point(rng, space.dim), v)
        if not A.contains(line) and line.direction in dirs:
            closed = False
    window = enumerate_axes(group, bound)
    missing = [d for d in window.directions() if d not in dirs]
    meets = not missing
    if missing:
        wit["meets_components"] = [str(tuple(map(str, d))) for d in missing]
    return WellBehavedReport(closed, convex, invariant, meets, resolution, wit)


def _tree_label(p: TreePoint) -> str:
    if p.tail:
        return f"boundary:{p.address}"
    return f"node:{p.address or 'root'}"


# ---------------------------------------------------------------------------
# induced action on a class base


def induced_isometry(pclass: ParallelClass, g: EuclideanIsometry):
    """Action ``y -> M y + c`` of a class-preserving element on ``X_c^0``."""
    d = pclass.direction
    od = g.apply_direction(d)
    if od != d and od != tuple(-x for x in d):
        return None
    b = pclass.basis
    # O b_j expressed in the basis (O preserves the orthogonal complement)
    cols = []
    for bj in b:
        cols.append(pclass.to_base(euclidean_line(pclass.space, g.apply_direction(bj), d)))
    m = transpose(cols)
    c = pclass.to_base(euclidean_line(pclass.space, g.translation, d))
    return EuclideanIsometry(tuple(tuple(r) for r in m), tuple(c))


def induced_group(group: CrystallographicGroup, pclass: ParallelClass) -> CrystallographicGroup:
    """The image of the class stabiliser in ``Isom(X_c^0)``."""
    space = pclass.base_space
    lat_vectors = []
    for col in transpose(group.lattice):
        lat_vectors.append(pclass.to_base(euclidean_line(pclass.space, tuple(col), pclass.direction)))
    images = []
    for o, t in group.point_group:
        img = induced_isometry(pclass, EuclideanIsometry(o, t))
        if img is None:
            continue
        if img.is_identity or img.matrix != EuclideanIsometry.identity(space.dim).matrix:
            images.append(img)
        else:
            # a pure translation of the base refines the induced lattice
            lat_vectors.append(img.translation)
    basis = integer_row_basis(lat_vectors)
    if len(basis) != space.dim:
        raise DomainError("class stabiliser does not act cocompactly on the class base")
    lattice = transpose(basis)
    pg, seen = [], set()
    for img in images:
        if img.matrix not in seen:
            seen.add(img.matrix)
            pg.append((img.matrix, img.translation))
    name = f"{group.name}|{','.join(map(str, pclass.direction))}"
    return CrystallographicGroup(space, lattice, pg, name)


# ---------------------------------------------------------------------------
# directed double


@dataclass(frozen=True, order=True)
class DirectedPoint:
    """A directed axis: class index, class point, orientation sheet."""

    class_index: int
    base: object
    sign: int


class DirectedAxes:
    """``DA = A x {+, -}`` with the sheet swap ``i`` and projection ``pi``."""

    def __init__(self, axes: AxesSpace):
        if axes.is_empty:
            raise ValueError("axes space is empty")
        self.axes = axes

    @staticmethod
    def involution(p: DirectedPoint) -> DirectedPoint:
        return DirectedPoint(p.class_index, p.base, -p.sign)

    @staticmethod
    def projection(p: DirectedPoint):
        return (p.class_index, p.base)

    def distance(self, p: DirectedPoint, q: DirectedPoint):
        if p.sign != q.sign or p.class_index != q.class_index:
            return math.inf
        return self.axes.classes[p.class_index].pclass.base_space.distance(p.base, q.base)

    def sign_action(self, g, class_index: int):
        """(target class index, sheet flip) for the action of ``g``."""
        c = self.axes.classes[class_index]
        if c.direction == VERTICAL:
            return class_index, False
        od = g.apply_direction(c.direction)
        target = canonical_direction(od)
        j = self.axes.class_index(target)
        if j is None:
            raise DomainError(f"axes space is not invariant: {c.direction} maps outside")
        return j, od != target

    def act(self, g, p: DirectedPoint) -> DirectedPoint:
        j, flip = self.sign_action(g, p.class_index)
        src = self.axes.classes[p.class_index].pclass
        dst = self.axes.classes[j].pclass
        if src.direction == VERTICAL:
            y = g.tree(p.base)
        else:
            line = src.from_base(p.base)
            y = dst.to_base(euclidean_line(self.axes.space, g(line.anchor), g.apply_direction(line.direction)))
        return DirectedPoint(j, y, -p.sign if flip else p.sign)


def directed_double(A: AxesSpace) -> DirectedAxes:
    return DirectedAxes(A)
