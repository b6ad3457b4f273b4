"""Exact isometries of the model spaces and the groups they generate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .exact import (
    Length,
    ONE,
    ZERO,
    frac,
    gram_dot,
    identity,
    inverse,
    matmul,
    matvec,
    nullspace,
    solve,
    solve_affine,
    to_matrix,
    transpose,
    vadd,
    vec,
    vscale,
    vsub,
)
from .lines import Line, euclidean_line, vertical_line
from .spaces import DomainError, EuclideanSpace, ProductPoint, ProductSpace, TreePoint, TreeSpace


class EnumerationError(RuntimeError):
    """The group cannot enumerate a finite window of its elements."""


class SemisimplicityError(ValueError):
    """An isometry neither fixes a point nor translates a line (within depth)."""


# ---------------------------------------------------------------------------
# isometries


@dataclass(frozen=True)
class EuclideanIsometry:
    """``x -> O x + t`` with rational ``O`` orthogonal for the space's Gram matrix."""

    matrix: tuple
    translation: tuple

    @classmethod
    def make(cls, matrix, translation) -> "EuclideanIsometry":
        return cls(to_matrix(matrix), vec(translation))

    @classmethod
    def identity(cls, n: int) -> "EuclideanIsometry":
        return cls(identity(n), (ZERO,) * n)

    @classmethod
    def translation_by(cls, v) -> "EuclideanIsometry":
        v = vec(v)
        return cls(identity(len(v)), v)

    def __call__(self, x):
        rows = self.__dict__.get("_rows")
        if rows is None:
            rows = _sparse_rows(self.matrix)
            object.__setattr__(self, "_rows", rows)
        out = []
        for row, t in zip(rows, self.translation):
            acc = t
            for j, c in row:
                if c == 1:
                    acc = acc + x[j]
                elif c == -1:
                    acc = acc - x[j]
                else:
                    acc = acc + c * x[j]
            out.append(acc)
        return tuple(out)

    def __mul__(self, other: "EuclideanIsometry") -> "EuclideanIsometry":
        return EuclideanIsometry(matmul(self.matrix, other.matrix), vadd(matvec(self.matrix, other.translation), self.translation))

    def inverse(self) -> "EuclideanIsometry":
        inv = inverse(self.matrix)
        return EuclideanIsometry(inv, tuple(-x for x in matvec(inv, self.translation)))

    def is_orthogonal(self, gram) -> bool:
        return matmul(matmul(transpose(self.matrix), gram), self.matrix) == tuple(tuple(r) for r in gram)

    @property
    def is_identity(self) -> bool:
        return self.matrix == identity(len(self.matrix)) and not any(self.translation)

    def apply_direction(self, d):
        return matvec(self.matrix, d)

    def __repr__(self):
        m = [[str(x) for x in r] for r in self.matrix]
        t = [str(x) for x in self.translation]
        return f"EuclideanIsometry({m}, {t})"


def _sparse_rows(matrix):
    rows = []
    for row in matrix:
        entries = []
        for j, c in enumerate(row):
            if c:
                entries.append((j, int(c) if c.denominator == 1 else c))
        rows.append(tuple(entries))
    return tuple(rows)


def _bits_to_int(address: str) -> int:
    return sum(1 << i for i, b in enumerate(address) if b == "1")


def _int_to_bits(r: int, n: int) -> str:
    return "".join("1" if (r >> i) & 1 else "0" for i in range(n))


@dataclass(frozen=True)
class TreeAutomorphism:
    """Level-preserving automorphism of the binary tree.

    The odometer power ``phi^k`` is stored as ``shift=k`` (addition of ``k``
    on the coset model ``Z / 2^n`` of each level). A general automorphism is a
    permutation ``table`` of the level-``D`` residues commuting with
    truncation.
    """

    shift: int = 0
    table: tuple | None = None

    def __post_init__(self):
        if self.table is not None:
            n = len(self.table)
            depth = n.bit_length() - 1
            if 1 << depth != n or sorted(self.table) != list(range(n)):
                raise ValueError("table must permute the 2^D leaf residues")
            for level in range(depth + 1):
                mod = 1 << level
                seen = {}
                for r, image in enumerate(self.table):
                    prev = seen.setdefault(r % mod, image % mod)
                    if prev != image % mod:
                        raise ValueError("table does not commute with the parent map")

    @classmethod
    def odometer(cls, k: int = 1) -> "TreeAutomorphism":
        return cls(shift=k)

    def map_address(self, address: str) -> str:
        n = len(address)
        r = _bits_to_int(address)
        if self.table is None:
            return _int_to_bits((r + self.shift) % (1 << n), n) if n else ""
        depth = len(self.table).bit_length() - 1
        if n > depth:
            raise DomainError("address deeper than the automorphism table")
        return _int_to_bits(self.table[r] % (1 << n), n)

    def __call__(self, p: TreePoint) -> TreePoint:
        return TreePoint(self.map_address(p.address), p.offset, p.tail)

    def __mul__(self, other: "TreeAutomorphism") -> "TreeAutomorphism":
        if self.table is None and other.table is None:
            return TreeAutomorphism(self.shift + other.shift)
        a, b = self._as_table(other), other._as_table(self)
        return TreeAutomorphism(table=tuple(a[b[r]] for r in range(len(b))))

    def _as_table(self, like: "TreeAutomorphism") -> tuple:
        if self.table is not None:
            return self.table
        n = len(like.table)
        return tuple((r + self.shift) % n for r in range(n))

    def inverse(self) -> "TreeAutomorphism":
        if self.table is None:
            return TreeAutomorphism(-self.shift)
        inv = [0] * len(self.table)
        for r, image in enumerate(self.table):
            inv[image] = r
        return TreeAutomorphism(table=tuple(inv))

    def period(self, address: str) -> int | None:
        """Orbit size of a node (``2^n`` for the odometer at level ``n``)."""
        if self.table is None:
            if self.shift == 0:
                return 1
            n = len(address)
            mod = 1 << n
            return mod // math.gcd(mod, self.shift % mod or mod)
        seen = address
        k = 0
        while True:
            seen = self.map_address(seen)
            k += 1
            if seen == address:
                return k

    def fixes(self, p: TreePoint) -> bool:
        return self(p) == p


@dataclass(frozen=True)
class ProductIsometry:
    """``(x, t) -> (phi(x), t + shift)`` on ``T x R``."""

    tree: TreeAutomorphism
    shift: Fraction

    def __call__(self, p: ProductPoint) -> ProductPoint:
        return ProductPoint(self.tree(p.tree), p.t + self.shift)

    def __mul__(self, other: "ProductIsometry") -> "ProductIsometry":
        return ProductIsometry(self.tree * other.tree, self.shift + other.shift)

    def inverse(self) -> "ProductIsometry":
        return ProductIsometry(self.tree.inverse(), -self.shift)

    @property
    def is_identity(self) -> bool:
        return self.shift == 0 and self.tree.table is None and self.tree.shift == 0


# ---------------------------------------------------------------------------
# line action


def apply_to_line(space, g, line: Line) -> Line:
    if line.vertical:
        return vertical_line(space, g.tree(line.anchor))
    return euclidean_line(space, g(line.anchor), g.apply_direction(line.direction))


def line_action(space, g, line: Line):
    """1-D action of a stabiliser element: ``s -> sign * s + shift``.

    The parameter is measured in units of the line's direction vector (the
    line shift for vertical lines). Returns None if ``g`` moves the line.
    """
    if apply_to_line(space, g, line) != line:
        return None
    if line.vertical:
        return 1, g.shift
    d = line.direction
    od = g.apply_direction(d)
    sign = 1 if od == d else -1
    moved = vsub(g(line.anchor), line.anchor)
    c = space.inner(moved, d) / space.inner(d, d)
    return sign, c


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class IsometryClass:
    kind: str
    fixed_point: object = None
    translation_sq: Fraction = ZERO
    axis: Line | None = None
    min_set: tuple | None = None

    @property
    def translation_length(self) -> Length:
        return Length(self.translation_sq)

    @property
    def elliptic(self) -> bool:
        return self.kind == "elliptic"


def _project(space, basis, v):
    """G-orthogonal projection of ``v`` onto span(basis)."""
    if not basis:
        return (ZERO,) * len(v)
    g = space.gram
    m = [[gram_dot(g, u, w) for w in basis] for u in basis]
    rhs = [gram_dot(g, u, v) for u in basis]
    coef = solve(m, rhs)
    out = (ZERO,) * len(v)
    for c, u in zip(coef, basis):
        out = vadd(out, vscale(c, u))
    return out


def min_displacement_set(space: EuclideanSpace, g: EuclideanIsometry):
    """(translation part along Fix(O), particular min point, kernel basis)."""
    n = space.dim
    a = [[g.matrix[i][j] - (ONE if i == j else ZERO) for j in range(n)] for i in range(n)]
    ker = nullspace(a, n)
    t_fix = _project(space, ker, g.translation)
    t_perp = vsub(g.translation, t_fix)
    sol = solve_affine(a, [-x for x in t_perp])
    if sol is None:  # pragma: no cover - orthogonal decomposition guarantees a solution
        raise ArithmeticError("inconsistent minimal displacement system")
    x0, _ = sol
    x_min = vsub(x0, _project(space, ker, x0))
    return t_fix, x_min, ker


def classify(group, g) -> IsometryClass:
    """Elliptic with a certified fixed point, or hyperbolic with an axis."""
    space = group.space
    if isinstance(space, EuclideanSpace):
        t_fix, x_min, ker = min_displacement_set(space, g)
        if not any(t_fix):
            if g(x_min) != x_min:  # pragma: no cover
                raise SemisimplicityError("fixed point certificate failed")
            return IsometryClass("elliptic", fixed_point=x_min, min_set=(x_min, tuple(ker)))
        axis = euclidean_line(space, x_min, t_fix)
        return IsometryClass("hyperbolic", translation_sq=space.norm_sq(t_fix), axis=axis, min_set=(x_min, tuple(ker)))
    if isinstance(space, ProductSpace):
        root = space.tree.root()
        if not g.tree.fixes(root):
            raise SemisimplicityError("tree automorphisms must fix the root")
        if g.shift == 0:
            return IsometryClass("elliptic", fixed_point=ProductPoint(root, ZERO))
        return IsometryClass("hyperbolic", translation_sq=g.shift * g.shift, axis=vertical_line(space, root))
    if isinstance(space, TreeSpace):
        return IsometryClass("elliptic", fixed_point=space.root())
    raise DomainError(f"cannot classify isometries of {space!r}")


def axes_of(group, g, max_level: int | None = None) -> list:
    """All axes of a hyperbolic element that are listed explicitly.

    Vertical lines through tree points fixed by the tree part (nodes only,
    up to ``max_level``). Euclidean elements return the canonical axis only;
    their full axis set is the parallel family through ``Min(g)``.
    """
    cls = classify(group, g)
    if cls.kind != "hyperbolic":
        return []
    space = group.space
    if isinstance(space, ProductSpace):
        depth = space.tree.depth if max_level is None else max_level
        out = []
        for p in space.tree.nodes(depth):
            if g.tree.fixes(p):
                out.append(vertical_line(space, p))
        return out
    return [cls.axis]


# ---------------------------------------------------------------------------
# groups


class GroupSpec:
    """A group acting on a model space, given by generators.

    Subclasses provide a finite description (lattice plus point group, or a
    cyclic product action) that makes windowed enumeration possible.
    """

    preset: str | None = None

    def __init__(self, space, generators: Iterable, name: str | None = None):
        self.space = space
        self.generators = tuple(generators)
        self.name = name or "custom"

    def identity(self):
        raise NotImplementedError

    def enumerate(self, bound, basepoint) -> list:
        raise EnumerationError(
            f"group {self.name!r} has no declared lattice; cannot enumerate an infinite window"
        )

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class TrivialGroup(GroupSpec):
    """The trivial group acting on a model space."""

    delta_bound = None

    def __init__(self, space, name: str = "trivial"):
        super().__init__(space, [], name)
        self.point_group = ((identity(space.dim), (ZERO,) * space.dim),) if isinstance(space, EuclideanSpace) else ()

    def identity(self):
        if isinstance(self.space, EuclideanSpace):
            return EuclideanIsometry.identity(self.space.dim)
        return ProductIsometry(TreeAutomorphism(0), ZERO)

    def contains(self, g) -> bool:
        return g.is_identity

    def enumerate(self, bound, basepoint) -> list:
        if frac(bound) < 0:
            raise ValueError("displacement bound must be non-negative")
        self.space.check_point(basepoint)
        return [self.identity()]


class CrystallographicGroup(GroupSpec):
    """``{x -> O x + t_O + L k}``: a finite point group over a lattice ``L``."""

    def __init__(self, space: EuclideanSpace, lattice, point_group, name: str = "custom", generators=None):
        self.lattice = to_matrix(lattice)  # columns are basis vectors
        n = space.dim
        if len(self.lattice) != n:
            raise ValueError("lattice basis has the wrong size")
        self._lat_inv = inverse(self.lattice)
        pg = []
        seen = set()
        for o, t in point_group:
            o = to_matrix(o)
            t = self.reduce(vec(t))
            if o in seen:
                continue
            seen.add(o)
            pg.append((o, t))
        self.point_group = tuple(pg)
        gens = list(generators) if generators is not None else self._default_generators()
        super().__init__(space, gens, name)
        for g in self.generators:
            if not g.is_orthogonal(space.gram):
                raise ValueError(f"generator {g!r} is not an isometry")

    def _default_generators(self):
        n = len(self.lattice)
        cols = transpose(self.lattice)
        gens = [EuclideanIsometry(identity(n), tuple(c)) for c in cols]
        gens += [EuclideanIsometry(o, t) for o, t in self.point_group if o != identity(n)]
        return gens

    @classmethod
    def from_generators(cls, space, lattice, generators, name="custom"):
        """Close the linear parts of ``generators`` modulo the lattice."""
        n = space.dim
        lat = to_matrix(lattice)
        lat_inv = inverse(lat)

        def reduce(t):
            k = matvec(lat_inv, t)
            k = tuple(x - math.floor(x) for x in k)
            return matvec(lat, k)

        elems = {identity(n): (ZERO,) * n}
        frontier = [(g.matrix, reduce(g.translation)) for g in generators]
        while frontier:
            o, t = frontier.pop()
            if o in elems:
                continue
            elems[o] = reduce(t)
            for o2, t2 in list(elems.items()):
                for a, b in (((o, t), (o2, t2)), ((o2, t2), (o, t))):
                    oo = matmul(a[0], b[0])
                    tt = reduce(vadd(matvec(a[0], b[1]), a[1]))
                    if oo not in elems:
                        frontier.append((oo, tt))
            if len(elems) > 48:
                raise ValueError("point group is not finite (more than 48 elements)")
        return cls(space, lat, list(elems.items()), name, generators=list(generators))

    @property
    def delta_bound(self) -> Fraction:
        """A rational bound on the shortest lattice translation."""
        best = min(self.space.norm_sq(tuple(c)) for c in transpose(self.lattice))
        r = Fraction(math.isqrt(math.ceil(best)))
        return r if r * r >= best else r + 1

    def reduce(self, t):
        k = matvec(self._lat_inv, t)
        k = tuple(x - math.floor(x) for x in k)
        return matvec(self.lattice, k)

    def identity(self):
        return EuclideanIsometry.identity(self.space.dim)

    def contains(self, g: EuclideanIsometry) -> bool:
        for o, t in self.point_group:
            if o == g.matrix:
                k = matvec(self._lat_inv, vsub(g.translation, t))
                return all(x.denominator == 1 for x in k)
        return False

    def enumerate(self, bound, basepoint) -> list:
        bound = frac(bound)
        if bound < 0:
            raise ValueError("displacement bound must be non-negative")
        space = self.space
        space.check_point(basepoint)
        n = space.dim
        ginv = inverse(space.gram)
        b2 = bound * bound
        out = []
        for o, t in self.point_group:
            w = vadd(vsub(matvec(o, basepoint), basepoint), t)
            kw = matvec(self._lat_inv, w)
            ranges = []
            for i in range(n):
                row = self._lat_inv[i]
                scale = gram_dot(ginv, row, row)  # |k_i + (M w)_i| <= bound * sqrt(scale)
                lim_sq = b2 * scale
                lim = Fraction(math.isqrt(math.ceil(lim_sq)) + 1)
                lo = math.floor(-kw[i] - lim)
                hi = math.ceil(-kw[i] + lim)
                ranges.append(range(lo, hi + 1))
            fw = [float(x) for x in w]
            flat = [[float(x) for x in row] for row in self.lattice]
            fb2 = float(b2) * (1 + 1e-9) + 1e-9
            for k in _product(ranges):
                fd = [fw[i] + sum(flat[i][j] * k[j] for j in range(n)) for i in range(n)]
                if space.float_norm_sq(fd) > fb2:
                    continue
                kk = vec(k)
                disp = vadd(w, matvec(self.lattice, kk))
                if space.norm_sq(disp) <= b2:
                    out.append(EuclideanIsometry(o, vadd(t, matvec(self.lattice, kk))))
        out.sort(key=_iso_key)
        return out


def _product(ranges):
    if not ranges:
        yield ()
        return
    for x in ranges[0]:
        for rest in _product(ranges[1:]):
            yield (x,) + rest


def _iso_key(g):
    if isinstance(g, EuclideanIsometry):
        return (g.matrix, g.translation)
    return (g.shift, g.tree.shift)


class OdometerGroup(GroupSpec):
    """``Z = <gamma>`` acting on ``T x R`` by ``gamma (x, t) = (phi(x), t + 1)``."""

    def __init__(self, space: ProductSpace | None = None, name: str = "tree-odometer"):
        space = space or ProductSpace(TreeSpace(12))
        gamma = ProductIsometry(TreeAutomorphism.odometer(1), ONE)
        super().__init__(space, [gamma], name)
        self.gamma = gamma

    delta_bound = Fraction(3)  # gamma moves every point by at most sqrt(5)

    def identity(self):
        return ProductIsometry(TreeAutomorphism(0), ZERO)

    def power(self, k: int) -> ProductIsometry:
        return ProductIsometry(TreeAutomorphism.odometer(k), Fraction(k))

    def contains(self, g) -> bool:
        return g.tree.table is None and g.tree.shift == g.shift

    def enumerate(self, bound, basepoint) -> list:
        bound = frac(bound)
        if bound < 0:
            raise ValueError("displacement bound must be non-negative")
        self.space.check_point(basepoint)
        kmax = math.floor(bound)
        out = []
        for k in range(-kmax, kmax + 1):
            g = self.power(k)
            if self.space.distance_sq(g(basepoint), basepoint) <= bound * bound:
                out.append(g)
        return out


def enumerate_elements(group: GroupSpec, displacement_bound, basepoint) -> list:
    """All elements ``g`` with ``d(g b, b) <= bound``, in a deterministic order."""
    return group.enumerate(displacement_bound, basepoint)


# ---------------------------------------------------------------------------
# line stabilisers


@dataclass
class StabilizerImage:
    """Image of a line stabiliser in ``Isom(line)``, observed in a window."""

    kind: str  # trivial-at-scale | infinite-cyclic | infinite-dihedral | reflection-at-scale
    kernel: list = field(default_factory=list)
    translations: list = field(default_factory=list)
    reflections: list = field(default_factory=list)
    kernel_stable: bool = False


def line_stabilizer_image(group: GroupSpec, line: Line, displacement_bound) -> StabilizerImage:
    space = group.space
    base = line.anchor if not line.vertical else ProductPoint(line.anchor, ZERO)

    def scan(bound):
        kern, trans, refl = [], [], []
        for g in group.enumerate(bound, base):
            act = line_action(space, g, line)
            if act is None:
                continue
            sign, c = act
            if sign == -1:
                refl.append(g)
            elif c != 0:
                trans.append(g)
            else:
                kern.append(g)
        return kern, trans, refl

    kern, trans, refl = scan(displacement_bound)
    kern2, _, _ = scan(frac(displacement_bound) + 1)
    stable = len(kern2) == len(kern)
    if refl and trans:
        kind = "infinite-dihedral"
    elif refl:
        # two reflections at distinct points compose to a translation
        centers = {line_action(space, g, line)[1] for g in refl}
        kind = "infinite-dihedral" if len(centers) > 1 else "reflection-at-scale"
    elif trans:
        kind = "infinite-cyclic"
    else:
        kind = "trivial-at-scale"
    return StabilizerImage(kind, kern, trans, refl, stable)
