"""Model CAT(0) spaces with exact metric geometry.

Three families are supported: Euclidean space ``E^n`` (``n <= 3``) with a
rational Gram matrix, the compactified weighted binary tree ``T`` truncated at
depth ``D`` (edge into level ``n`` has length ``2^-n``), and the product
``T x R``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import (
    ONE,
    ZERO,
    Length,
    frac,
    gram_dot,
    identity,
    solve,
    to_matrix,
    vadd,
    vec,
    vscale,
    vsub,
)


class DomainError(ValueError):
    """A point, ball or line does not belong to the space it is used with."""


# ---------------------------------------------------------------------------
# points and balls


@dataclass(frozen=True, order=True)
class TreePoint:
    """A point of the truncated tree.

    ``address`` is the LSB-first binary residue of the node the point's edge
    leads into; ``offset`` is the distance below the parent node, in
    ``(0, 2^-n]`` for an edge into level ``n`` (the root is ``("", 0)``).
    Tail points (``tail=True``) sit on the virtual edge of length ``2^-D``
    below a level-``D`` node; the tail end is the boundary point.
    """

    address: str = ""
    offset: Fraction = ZERO
    tail: bool = False

    @property
    def level(self) -> int:
        return len(self.address) + (1 if self.tail else 0)

    @property
    def key(self) -> str:
        return self.address + ("*" if self.tail else "")


@dataclass(frozen=True, order=True)
class ProductPoint:
    tree: TreePoint
    t: Fraction


@dataclass(frozen=True)
class Ball:
    """Ball with exact rational squared radius; open unless ``closed``."""

    center: object
    radius_sq: Fraction
    closed: bool = False

    def __post_init__(self):
        if self.radius_sq <= 0:
            raise ValueError("ball radius must be positive")

    @classmethod
    def of(cls, center, radius, closed: bool = False) -> "Ball":
        r = frac(radius)
        if r <= 0:
            raise ValueError("ball radius must be positive")
        return cls(center, r * r, closed)

    @property
    def radius(self) -> Length:
        return Length(self.radius_sq)


def root_point() -> TreePoint:
    return TreePoint("", ZERO, False)


def node_depth(level: int) -> Fraction:
    """Distance from the root to any node of the given level."""
    return ONE - Fraction(1, 2**level)


# ---------------------------------------------------------------------------
# minimum power point (exact, Welzl-style)


def _power(gram, c, w, x) -> Fraction:
    d = vsub(x, c)
    return gram_dot(gram, d, d) - w


def _basis(gram, centers, weights, idx):
    """Point of aff(idx) with equal power to every centre in ``idx``."""
    c0 = centers[idx[0]]
    w0 = weights[idx[0]]
    if len(idx) == 1:
        return c0, -w0, (ONE,)
    ds = [vsub(centers[j], c0) for j in idx[1:]]
    m = [[gram_dot(gram, dk, dj) for dk in ds] for dj in ds]
    rhs = [(gram_dot(gram, dj, dj) - weights[j] + w0) / 2 for dj, j in zip(ds, idx[1:])]
    mu = solve(m, rhs)
    if mu is None:
        return None
    x = c0
    for mk, dk in zip(mu, ds):
        x = vadd(x, vscale(mk, dk))
    lam = (ONE - sum(mu, ZERO),) + tuple(mu)
    return x, _power(gram, c0, w0, x), lam


def _in_hull(gram, centers, weights, active, x) -> bool:
    n = len(x)
    for size in range(1, min(len(active), n + 1) + 1):
        for sub in itertools.combinations(active, size):
            b = _basis(gram, centers, weights, sub)
            if b is None:
                continue
            bx, _, lam = b
            if bx == x and all(l >= 0 for l in lam):
                return True
    return False


def _certify(gram, centers, weights, x, value) -> bool:
    powers = [_power(gram, c, w, x) for c, w in zip(centers, weights)]
    if max(powers) != value:
        return False
    active = [i for i, p in enumerate(powers) if p == value]
    return _in_hull(gram, centers, weights, active, x)


def min_power_point(centers: Sequence[tuple], weights: Sequence[Fraction], gram=None):
    """Exactly minimise ``max_i |x - c_i|^2 - w_i`` over ``x``.

    Returns ``(x, value)``. The minimiser lies in the convex hull of the
    centres and is found by a Welzl recursion over equal-power supports;
    the answer is certified by the KKT condition (``x`` in the hull of the
    active centres) and recomputed by brute force over supports if the
    certificate fails.
    """
    if not centers:
        raise ValueError("need at least one centre")
    n = len(centers[0])
    gram = gram if gram is not None else identity(n)
    idx = list(range(len(centers)))

    def welzl(ps, rs):
        if not ps or len(rs) == n + 1:
            if not rs:
                return None
            b = _basis(gram, centers, weights, rs)
            return None if b is None else b[:2]
        p = ps[-1]
        sol = welzl(ps[:-1], rs)
        if sol is not None and _power(gram, centers[p], weights[p], sol[0]) <= sol[1]:
            return sol
        return welzl(ps[:-1], rs + [p])

    sol = welzl(idx, [])
    if sol is not None and _certify(gram, centers, weights, *sol):
        return sol
    best = None
    for size in range(1, min(len(idx), n + 1) + 1):
        for sub in itertools.combinations(idx, size):
            b = _basis(gram, centers, weights, sub)
            if b is None or any(l < 0 for l in b[2]):
                continue
            x, v, _ = b
            if all(_power(gram, c, w, x) <= v for c, w in zip(centers, weights)):
                if best is None or v < best[1]:
                    best = (x, v)
    if best is None:  # pragma: no cover - the optimum always has a support
        raise ArithmeticError("no certified minimum power point")
    return best


def _decide(value, active_closed: Iterable[bool]) -> bool:
    if value < 0:
        return True
    if value > 0:
        return False
    return all(active_closed)


# ---------------------------------------------------------------------------
# the spaces


def _positive_definite(g) -> bool:
    n = len(g)
    if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
        return False
    # exact LDL^T: every pivot must be positive
    a = [list(r) for r in g]
    for k in range(n):
        if a[k][k] <= 0:
            return False
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    return True


class EuclideanSpace:
    """``E^n`` in coordinates with a rational Gram matrix (identity by default)."""

    kind = "euclidean"

    def __init__(self, dim: int, gram=None):
        if not 1 <= dim <= 3:
            raise ValueError("Euclidean model spaces have dimension 1..3")
        self.dim = dim
        self.gram = to_matrix(gram) if gram is not None else identity(dim)
        if len(self.gram) != dim or any(len(r) != dim for r in self.gram):
            raise ValueError("Gram matrix has the wrong size")
        if not _positive_definite(self.gram):
            raise ValueError("Gram matrix must be symmetric positive definite")
        self._unit = self.gram == identity(dim)
        self._fgram = [[float(x) for x in row] for row in self.gram]

    def __repr__(self):
        return f"EuclideanSpace(dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, EuclideanSpace) and (self.dim, self.gram) == (other.dim, other.gram)

    def __hash__(self):
        return hash((self.dim, self.gram))

    def point(self, *coords) -> tuple:
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = coords[0]
        return self.check_point(vec(coords))

    def origin(self) -> tuple:
        return (ZERO,) * self.dim

    def check_point(self, p):
        if not isinstance(p, tuple) or len(p) != self.dim or not all(isinstance(x, Fraction) for x in p):
            raise DomainError(f"{p!r} is not a point of {self!r}")
        return p

    def inner(self, u, v) -> Fraction:
        if self._unit:
            return sum((a * b for a, b in zip(u, v)), ZERO)
        return gram_dot(self.gram, u, v)

    def norm_sq(self, u) -> Fraction:
        if self._unit:
            return sum((a * a for a in u), ZERO)
        return gram_dot(self.gram, u, u)

    def float_norm_sq(self, u) -> float:
        g = self._fgram
        n = len(u)
        return sum(u[i] * g[i][j] * u[j] for i in range(n) for j in range(n))

    def distance_sq(self, p, q) -> Fraction:
        self.check_point(p)
        self.check_point(q)
        d = vsub(p, q)
        if self._unit:
            return sum((x * x for x in d), ZERO)
        return gram_dot(self.gram, d, d)

    def float_distance(self, p, q) -> float:
        """Floating-point distance, for prefilters only."""
        d = [float(a) - float(b) for a, b in zip(p, q)]
        g = self._fgram
        s = sum(d[i] * g[i][j] * d[j] for i in range(len(d)) for j in range(len(d)))
        return math.sqrt(max(s, 0.0))

    def distance(self, p, q) -> Length:
        return Length(self.distance_sq(p, q))

    def geodesic_point(self, p, q, t) -> tuple:
        t = frac(t)
        return vadd(p, vscale(t, vsub(q, p)))

    def min_power(self, balls: Sequence[Ball]):
        for b in balls:
            self.check_point(b.center)
        return min_power_point([b.center for b in balls], [b.radius_sq for b in balls], self.gram)

    def balls_intersect(self, balls: Sequence[Ball]) -> bool:
        x, value = self.min_power(balls)
        active = [b.closed for b in balls if _power(self.gram, b.center, b.radius_sq, x) == value]
        return _decide(value, active)


class TreeSpace:
    """The rooted binary tree with edge weights ``2^-n``, truncated at depth ``D``."""

    kind = "tree"

    def __init__(self, depth: int = 12, compactified: bool = True):
        if depth < 1:
            raise ValueError("tree depth must be positive")
        self.depth = depth
        self.compactified = compactified

    def __repr__(self):
        return f"TreeSpace(depth={self.depth}, compactified={self.compactified})"

    def __eq__(self, other):
        return isinstance(other, TreeSpace) and (self.depth, self.compactified) == (other.depth, other.compactified)

    def __hash__(self):
        return hash(("tree", self.depth, self.compactified))

    # -- constructors
    def root(self) -> TreePoint:
        return root_point()

    def node(self, address: str) -> TreePoint:
        if len(address) > self.depth or set(address) - {"0", "1"}:
            raise DomainError(f"bad node address {address!r}")
        if not address:
            return root_point()
        return TreePoint(address, Fraction(1, 2 ** len(address)), False)

    def boundary(self, address: str) -> TreePoint:
        if not self.compactified:
            raise DomainError("boundary points need a compactified tree")
        if len(address) != self.depth or set(address) - {"0", "1"}:
            raise DomainError("boundary addresses have length D")
        return TreePoint(address, Fraction(1, 2**self.depth), True)

    def edge_length(self, level: int) -> Fraction:
        if level == self.depth + 1:
            return Fraction(1, 2**self.depth)
        return Fraction(1, 2**level)

    def is_boundary(self, p: TreePoint) -> bool:
        return p.tail and p.offset == Fraction(1, 2**self.depth)

    def is_node(self, p: TreePoint) -> bool:
        return not p.tail and p.offset == (Fraction(1, 2 ** len(p.address)) if p.address else 0)

    def check_point(self, p):
        if not isinstance(p, TreePoint):
            raise DomainError(f"{p!r} is not a tree point")
        n = len(p.address)
        if n > self.depth or set(p.address) - {"0", "1"}:
            raise DomainError(f"bad address in {p!r}")
        if p.tail:
            if not self.compactified or n != self.depth:
                raise DomainError(f"tail point {p!r} not in {self!r}")
            if not 0 < p.offset <= Fraction(1, 2**self.depth):
                raise DomainError(f"offset out of range in {p!r}")
        elif n == 0:
            if p.offset != 0:
                raise DomainError("the root has offset 0")
        elif not 0 < p.offset <= Fraction(1, 2**n):
            raise DomainError(f"offset out of range in {p!r}")
        return p

    def point_depth(self, p: TreePoint) -> Fraction:
        if p.tail:
            return node_depth(self.depth) + p.offset
        if not p.address:
            return ZERO
        return node_depth(len(p.address) - 1) + p.offset

    def meet_depth(self, p: TreePoint, q: TreePoint) -> Fraction:
        a, b = p.key, q.key
        if a.startswith(b) or b.startswith(a):
            return min(self.point_depth(p), self.point_depth(q))
        m = 0
        while a[m] == b[m]:
            m += 1
        return node_depth(m)

    def meet(self, p: TreePoint, q: TreePoint) -> TreePoint:
        """The deepest common point of the root paths of ``p`` and ``q``."""
        a, b = p.key, q.key
        if a.startswith(b) or b.startswith(a):
            return p if self.point_depth(p) <= self.point_depth(q) else q
        m = 0
        while a[m] == b[m]:
            m += 1
        return self.node(a[:m])

    def distance_q(self, p, q) -> Fraction:
        self.check_point(p)
        self.check_point(q)
        return self.point_depth(p) + self.point_depth(q) - 2 * self.meet_depth(p, q)

    def distance(self, p, q) -> Length:
        return Length.of(self.distance_q(p, q))

    def distance_sq(self, p, q) -> Fraction:
        d = self.distance_q(p, q)
        return d * d

    def along(self, key: str, h: Fraction) -> TreePoint:
        """Point at depth ``h`` on the root path towards ``key``."""
        if h < 0:
            raise DomainError("negative depth")
        if h == 0:
            return root_point()
        tail = key.endswith("*")
        addr = key[:-1] if tail else key
        for n in range(1, len(addr) + 1):
            if h <= node_depth(n):
                return TreePoint(addr[:n], h - node_depth(n - 1), False)
        if tail and h <= node_depth(self.depth) + Fraction(1, 2**self.depth):
            return TreePoint(addr, h - node_depth(self.depth), True)
        raise DomainError(f"depth {h} is beyond the end of path {key!r}")

    def geodesic_point(self, p, q, t) -> TreePoint:
        t = frac(t)
        d = self.distance_q(p, q)
        if d == 0:
            return p
        s = t * d
        up = self.point_depth(p) - self.meet_depth(p, q)
        if s <= up:
            return self.along(p.key, self.point_depth(p) - s)
        return self.along(q.key, self.meet_depth(p, q) + (s - up))

    def balls_intersect(self, balls: Sequence[Ball]) -> bool:
        # subtrees of an R-tree have the Helly property with number 2
        for b in balls:
            self.check_point(b.center)
        for b1, b2 in itertools.combinations(balls, 2):
            d = self.distance_q(b1.center, b2.center)
            r = Length(b1.radius_sq)
            s = Length(b2.radius_sq)
            # d < r + s  (<= when both closed)
            both_closed = b1.closed and b2.closed
            if not _lt_sum(d, r, s, allow_equal=both_closed):
                return False
        return True

    def nodes(self, max_level: int) -> list:
        out = [root_point()]
        for n in range(1, max_level + 1):
            for bits in itertools.product("01", repeat=n):
                out.append(self.node("".join(bits)))
        return out


def _lt_sum(d: Fraction, r: Length, s: Length, allow_equal: bool) -> bool:
    """Decide ``d < r + s`` (or ``<=``) for rational ``d`` and root lengths."""
    if d < 0:
        return True
    # (d^2 - r^2 - s^2) vs 2 r s
    lhs = d * d - r.sq - s.sq
    if lhs < 0:
        return True
    if allow_equal:
        return lhs * lhs <= 4 * r.sq * s.sq
    return lhs * lhs < 4 * r.sq * s.sq


class ProductSpace:
    """The product ``T x R`` of the truncated tree with a line (l2 metric)."""

    kind = "product"

    def __init__(self, tree: TreeSpace | None = None):
        self.tree = tree or TreeSpace()

    def __repr__(self):
        return f"ProductSpace({self.tree!r})"

    def __eq__(self, other):
        return isinstance(other, ProductSpace) and self.tree == other.tree

    def __hash__(self):
        return hash(("product", self.tree))

    def point(self, x: TreePoint, t) -> ProductPoint:
        return self.check_point(ProductPoint(x, frac(t)))

    def origin(self) -> ProductPoint:
        return ProductPoint(root_point(), ZERO)

    def check_point(self, p):
        if not isinstance(p, ProductPoint):
            raise DomainError(f"{p!r} is not a product point")
        self.tree.check_point(p.tree)
        return p

    def distance_sq(self, p, q) -> Fraction:
        self.check_point(p)
        self.check_point(q)
        dt = self.tree.distance_q(p.tree, q.tree)
        return dt * dt + (p.t - q.t) ** 2

    def float_distance(self, p, q) -> float:
        return math.sqrt(float(self.distance_sq(p, q)))

    def distance(self, p, q) -> Length:
        return Length(self.distance_sq(p, q))

    def geodesic_point(self, p, q, t) -> ProductPoint:
        t = frac(t)
        return ProductPoint(self.tree.geodesic_point(p.tree, q.tree, t), p.t + t * (q.t - p.t))

    def balls_intersect(self, balls: Sequence[Ball]) -> bool:
        value, closed_ok = self.min_power(balls)
        return _decide(value, [closed_ok])

    def min_power(self, balls: Sequence[Ball]):
        """Minimum over ``T x R`` of ``max_i d^2 - r_i^2``.

        The tree coordinate of the optimum lies in the subtree spanned by the
        centres. That subtree is cut at the centres and their pairwise meets
        into segments on which every tree distance is affine, which turns
        each segment into a planar minimum power problem on a strip.
        Returns ``(value, all_active_closed)``.
        """
        for b in balls:
            self.check_point(b.center)
        tree = self.tree
        xs = [b.center.tree for b in balls]
        ts = [b.center.t for b in balls]
        ws = [b.radius_sq for b in balls]
        breaks = set(xs)
        for a, b in itertools.combinations(xs, 2):
            breaks.add(tree.meet(a, b))
        breaks = sorted(breaks)
        best = None
        for p in breaks:
            v = self._line_min(tree, p, xs, ts, ws, balls)
            best = v if best is None or v[0] < best[0] else best
        for p, q in itertools.combinations(breaks, 2):
            length = tree.distance_q(p, q)
            signs = []
            ok = True
            for x in xs:
                a = tree.distance_q(p, x)
                b = tree.distance_q(q, x)
                if b - a == length:
                    signs.append((ONE, a))
                elif a - b == length:
                    signs.append((-ONE, a))
                else:
                    ok = False
                    break
            if not ok:
                continue
            # distance to x_i along the segment is a_i + sign_i * s = |s - s_i|
            s_centers = [(-sg * a,) for sg, a in signs]
            centers = [(sc[0], t) for sc, t in zip(s_centers, ts)]
            x, value = min_power_point(centers, ws)
            if 0 <= x[0] <= length:
                active = [b.closed for (c, w, b) in zip(centers, ws, balls) if _power(identity(2), c, w, x) == value]
                cand = (value, all(active))
                if best is None or cand[0] < best[0] or (cand[0] == best[0] and cand[1] and not best[1]):
                    best = cand
        return best

    def _line_min(self, tree, p, xs, ts, ws, balls):
        # fix the tree coordinate at p and optimise over t
        centers = [(t,) for t in ts]
        weights = [w - tree.distance_q(p, x) ** 2 for w, x in zip(ws, xs)]
        x, value = min_power_point(centers, weights)
        active = [b.closed for (c, w, b) in zip(centers, weights, balls) if (x[0] - c[0]) ** 2 - w == value]
        return value, all(active)


# ---------------------------------------------------------------------------
# module-level operations


def _check_same(space, *points):
    for p in points:
        space.check_point(p)


def distance(space, p, q) -> Length:
    """Exact distance as a :class:`Length` (``sqrt`` of a rational)."""
    _check_same(space, p, q)
    return space.distance(p, q)


def geodesic_point(space, p, q, t):
    """Point at fraction ``t`` of the way from ``p`` to ``q``."""
    _check_same(space, p, q)
    t = frac(t)
    if not 0 <= t <= 1:
        raise ValueError("geodesic parameter must lie in [0, 1]")
    if p == q:
        return p
    return space.geodesic_point(p, q, t)


def balls_intersect(space, balls: Sequence[Ball]) -> bool:
    """Exact decision of whether the balls have a common point."""
    balls = list(balls)
    if not balls:
        raise ValueError("balls_intersect needs at least one ball")
    return space.balls_intersect(balls)


@dataclass
class TriangleCheck:
    passed: bool
    worst_slack: float
    samples: int
    worst_slack_sq: Fraction = field(default=ZERO)


def cat0_triangle_check(space, p, q, r, samples: int = 10, seed: int = 0) -> TriangleCheck:
    """Sample comparison-point pairs on the triangle ``pqr``.

    Each pair ``(a, b)`` on two sides is compared with its Euclidean
    comparison pair; the comparison length is computed from squared side
    lengths only (law of cosines), so the test is exact. ``worst_slack`` is
    the largest ``d(a, b) - d(a', b')`` seen (should be ``<= 0``).
    """
    _check_same(space, p, q, r)
    if samples <= 0:
        raise ValueError("samples must be positive")
    c2 = space.distance_sq(p, q)  # |u|^2, u = q' - p'
    a2 = space.distance_sq(q, r)
    b2 = space.distance_sq(p, r)  # |v|^2, v = r' - p'
    uv = (c2 + b2 - a2) / 2
    rng = random.Random(seed)
    den = 16

    def on_side(side, s):
        # point of the triangle and its coefficients (alpha, beta) in u, v
        if side == 0:
            return geodesic_point(space, p, q, s), (s, ZERO)
        if side == 1:
            return geodesic_point(space, q, r, s), (ONE - s, s)
        return geodesic_point(space, p, r, s), (ZERO, s)

    worst = None
    worst_sq = ZERO
    ok = True
    for _ in range(samples):
        s1, s2 = rng.sample(range(3), 2)
        t1 = Fraction(rng.randint(0, den), den)
        t2 = Fraction(rng.randint(0, den), den)
        x, (al1, be1) = on_side(s1, t1)
        y, (al2, be2) = on_side(s2, t2)
        al, be = al1 - al2, be1 - be2
        comp_sq = al * al * c2 + 2 * al * be * uv + be * be * b2
        real_sq = space.distance_sq(x, y)
        slack = float(Length(real_sq)) - float(Length(max(comp_sq, ZERO)))
        if real_sq > comp_sq:
            ok = False
        if worst is None or slack > worst:
            worst = slack
            worst_sq = real_sq - comp_sq
    return TriangleCheck(ok, worst, samples, worst_sq)
