"""Equivariant good covers by balls, built shell by shell."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

from .exact import (
    ZERO,
    IntFrame,
    Length,
    frac,
    inverse,
    solve,
    solve_affine,
    sqrt_le_sum,
    sqrt_lt_sum,
    sqrt_sum_lt,
    vadd,
    vscale,
)
from .spaces import Ball, EuclideanSpace, ProductPoint, ProductSpace, TreePoint, node_depth


class CoverError(RuntimeError):
    """The cover construction could not proceed (non-proper input or budget)."""


@dataclass(frozen=True)
class CoverPolicy:
    """Radius and cell rules for :func:`build_good_cover`.

    ``eps_cap`` bounds every radius; ``ladder`` lists the admissible radii
    (largest first) and each orbit gets the largest value ``q`` with
    ``divisor * q <= delta`` where ``delta`` is its minimal positive
    displacement. Divisor 2 is the least that keeps distinct translates of
    an open ball disjoint.
    """

    eps_cap: Fraction = Fraction(1, 4)
    divisor: int = 2
    max_subdivision: int = 6
    cell_side: Fraction | None = None

    def ladder(self):
        k = 0
        while True:
            for base in (4, 6):
                q = Fraction(1, base * 2**k)
                if q <= self.eps_cap:
                    yield q
            k += 1
            if k > 24:
                return

    def epsilon(self, delta_sq) -> Fraction:
        for q in self.ladder():
            if delta_sq is None or (self.divisor * q) ** 2 <= delta_sq:
                return q
        raise CoverError("no admissible radius: displacement too small (is the action proper?)")

    def __post_init__(self):
        if self.divisor < 2:
            raise ValueError("divisor must be at least 2")
        if self.eps_cap <= 0:
            raise ValueError("eps_cap must be positive")


@dataclass(frozen=True, order=True)
class CoverBall:
    center: object
    radius_sq: Fraction
    orbit: int

    @property
    def ball(self) -> Ball:
        return Ball(self.center, self.radius_sq)

    @property
    def radius(self) -> Length:
        return Length(self.radius_sq)


class GoodCover:
    """Balls of an equivariant cover that meet the closed window ``B_R(*)``."""

    def __init__(self, space, group, window_R, basepoint, balls, orbit_reps, policy):
        self.space = space
        self.group = group
        self.window_R = frac(window_R)
        self.basepoint = basepoint
        self.balls = list(balls)
        self.orbit_reps = list(orbit_reps)  # (center, radius_sq)
        self.policy = policy
        self._index = {(b.center, b.radius_sq): i for i, b in enumerate(self.balls)}

    def __len__(self):
        return len(self.balls)

    def __repr__(self):
        return f"GoodCover({self.group.name}, R={self.window_R}, balls={len(self.balls)}, orbits={len(self.orbit_reps)})"

    @property
    def max_radius(self) -> Fraction:
        return max((Length(b.radius_sq).exact() or Fraction(0) for b in self.balls), default=Fraction(0))

    def index_of(self, center, radius_sq):
        return self._index.get((center, radius_sq))

    def meets_window(self, center, radius_sq) -> bool:
        d2 = self.space.distance_sq(center, self.basepoint)
        return sqrt_lt_sum(d2, self.window_R**2, radius_sq)

    def image(self, g, i: int):
        """Index of ``g . B_i`` or None if it leaves the window."""
        b = self.balls[i]
        return self._index.get((g(b.center), b.radius_sq))

    def label(self, i: int) -> str:
        return ball_label(self.balls[i].center, self.balls[i].radius_sq)


def point_label(p) -> str:
    if isinstance(p, ProductPoint):
        return f"{point_label(p.tree)}@{p.t}"
    if isinstance(p, TreePoint):
        kind = "b" if p.tail else "t"
        return f"{kind}{p.address or '-'}:{p.offset}"
    return ",".join(str(x) for x in p)


def ball_label(center, radius_sq) -> str:
    return f"[{point_label(center)}]r2={radius_sq}"


# ---------------------------------------------------------------------------
# cells


@dataclass(frozen=True)
class _Cell:
    center: object
    rho_sq: Fraction
    half: object  # half side (euclidean) or None
    level: int


def _box_rho_sq(space: EuclideanSpace, half: Fraction) -> Fraction:
    best = ZERO
    for signs in iproduct((1, -1), repeat=space.dim):
        v = tuple(half * s for s in signs)
        best = max(best, space.norm_sq(v))
    return best


def _default_side(space: EuclideanSpace) -> Fraction:
    for q in CoverPolicy(eps_cap=Fraction(1, 4)).ladder():
        if _box_rho_sq(space, q / 2) <= Fraction(1, 32):
            return q
    raise CoverError("degenerate metric")


class _Pool:
    """Spatial hash of ball centres for covering queries."""

    def __init__(self, key):
        self.key = key
        self.cells: dict = {}

    def add(self, center, radius_sq):
        r = math.sqrt(float(radius_sq))
        self.cells.setdefault(self.key(center), []).append((center, radius_sq, r))

    def near(self, center):
        k = self.key(center)
        for off in iproduct((-2, -1, 0, 1, 2), repeat=len(k)):
            yield from self.cells.get(tuple(a + b for a, b in zip(k, off)), ())


def _euclid_key(p):
    return tuple(math.floor(2 * x) for x in p)


def _product_key(p):
    # tree points carry no coordinates; they all share one bucket
    t = getattr(p, "t", None)
    return () if t is None else (math.floor(2 * t),)


# ---------------------------------------------------------------------------
# construction


def _fixed_set(space, g):
    """Fixed affine subspace of a Euclidean isometry: (point, basis) or None."""
    n = space.dim
    a = [[g.matrix[i][j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    return solve_affine(a, [-x for x in g.translation])


def _project(space, point, basis, x):
    """Nearest point to ``x`` on ``point + span(basis)``."""
    if not basis:
        return point
    m = [[space.inner(u, w) for w in basis] for u in basis]
    diff = tuple(a - b for a, b in zip(x, point))
    rhs = [space.inner(u, diff) for u in basis]
    coef = solve(m, rhs)
    out = point
    for c, u in zip(coef, basis):
        out = vadd(out, vscale(c, u))
    return out


class _Builder:
    def __init__(self, space, group, R, policy, basepoint):
        self.space = space
        self.group = group
        self.R = frac(R)
        self.policy = policy
        self.star = basepoint
        self.orbit_reps: list = []
        self.pool = _Pool(_euclid_key if isinstance(space, EuclideanSpace) else _product_key)
        self.pool_R = self.R + 1
        self.elements = group.enumerate(2 * self.R + 3, basepoint)
        self._delta_cache: dict = {}

    def delta_sq(self, x):
        if x in self._delta_cache:
            return self._delta_cache[x]
        bound = self.group.delta_bound
        best = None
        if bound is not None:
            for g in self.group.enumerate(bound, x):
                y = g(x)
                if y != x:
                    d = self.space.distance_sq(x, y)
                    if best is None or d < best:
                        best = d
        self._delta_cache[x] = best
        return best

    def epsilon(self, x) -> Fraction:
        return self.policy.epsilon(self.delta_sq(x))

    def covered(self, cell: _Cell) -> bool:
        rho = math.sqrt(float(cell.rho_sq))
        for c, r_sq, r_f in self.pool.near(cell.center):
            # float prefilter; the decision itself is exact
            if self.space.float_distance(c, cell.center) + rho > r_f + 1e-9:
                continue
            r = Length(r_sq).exact()
            if sqrt_sum_lt(self.space.distance_sq(c, cell.center), cell.rho_sq, r):
                return True
        return False

    def add_orbit(self, x, eps: Fraction):
        self.orbit_reps.append((x, eps * eps))
        seen = set()
        lim = self.pool_R * self.pool_R
        for g in self.elements:
            y = g(x)
            if y in seen:
                continue
            seen.add(y)
            if self.space.distance_sq(y, self.star) <= lim:
                self.pool.add(y, eps * eps)

    def try_cover(self, cell: _Cell, candidates) -> bool:
        for x in candidates:
            eps = self.epsilon(x)
            if sqrt_sum_lt(self.space.distance_sq(x, cell.center), cell.rho_sq, eps):
                self.add_orbit(x, eps)
                return True
        return False

    def window_balls(self) -> list:
        balls = []
        seen = set()
        for k, (x, r2) in enumerate(self.orbit_reps):
            for g in self.elements:
                y = g(x)
                if (y, r2) in seen:
                    continue
                seen.add((y, r2))
                d2 = self.space.distance_sq(y, self.star)
                if sqrt_lt_sum(d2, self.R * self.R, r2):
                    balls.append(CoverBall(y, r2, k))
        balls.sort(key=lambda b: (_sort_key(b.center), b.radius_sq))
        return balls


def _sort_key(p):
    if isinstance(p, ProductPoint):
        return (p.t, p.tree.address, p.tree.tail, p.tree.offset)
    return p


class _EuclideanBuilder(_Builder):
    def __init__(self, space, group, R, policy, basepoint):
        super().__init__(space, group, R, policy, basepoint)
        self.side = policy.cell_side or self._choose_side()

    def _choose_side(self) -> Fraction:
        """Largest ladder side whose cells are covered by the median radius
        of the unit ball around the basepoint."""
        side = _default_side(self.space)
        step = side / 2
        radii = []
        for k in iproduct(range(-4, 5), repeat=self.space.dim):
            x = tuple(s + step * ki for s, ki in zip(self.star, k))
            if self.space.distance_sq(x, self.star) <= 1:
                radii.append(self.epsilon(x))
        radii.sort()
        typical = radii[len(radii) // 2]
        for q in self.policy.ladder():
            if q <= side and _box_rho_sq(self.space, q / 2) < typical * typical:
                return q
        return side

    def cells(self):
        space = self.space
        h = self.side
        rho_sq = _box_rho_sq(space, h / 2)
        ginv = inverse(space.gram)
        lim = []
        for i in range(space.dim):
            reach = (float(self.R) + 1.0) * math.sqrt(float(ginv[i][i]))
            lim.append(math.ceil(reach / float(h)) + 1)
        out = []
        base = [math.floor(x / h) for x in self.star]
        for k in iproduct(*(range(-m, m + 1) for m in lim)):
            c = tuple(h * (b + ki) for b, ki in zip(base, k))
            d2 = space.distance_sq(c, self.star)
            if not sqrt_le_sum(d2, self.R, rho_sq):
                continue
            n = 1
            while not sqrt_le_sum(d2, Fraction(n), rho_sq):
                n += 1
            out.append((n, c, _Cell(c, rho_sq, h / 2, 0)))
        out.sort(key=lambda t: (t[0], t[1]))
        return out

    def candidates(self, cell: _Cell):
        out = [cell.center]
        reach = Length(cell.rho_sq)
        bound = 2 * (float(reach) + float(self.policy.eps_cap)) + 1e-9
        bound = Fraction(math.ceil(bound * 64), 64)
        extra = []
        for g in self.group.enumerate(bound, cell.center):
            if g.is_identity:
                continue
            fs = _fixed_set(self.space, g)
            if fs is None:
                continue
            p = _project(self.space, fs[0], fs[1], cell.center)
            d2 = self.space.distance_sq(p, cell.center)
            if d2 <= cell.rho_sq and p != cell.center:
                extra.append((len(fs[1]), d2, p))
        extra.sort()
        seen = set(out)
        for _, _, p in extra:
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out

    def subdivide(self, cell: _Cell):
        q = cell.half / 2
        rho_sq = _box_rho_sq(self.space, q)
        for signs in iproduct((-1, 1), repeat=self.space.dim):
            c = tuple(x + s * q for x, s in zip(cell.center, signs))
            yield _Cell(c, rho_sq, q, cell.level + 1)

    def handle(self, cell: _Cell):
        if self.covered(cell):
            return
        if self.try_cover(cell, self.candidates(cell)):
            return
        if cell.level >= self.policy.max_subdivision:
            raise CoverError(f"could not cover the cell at {point_label(cell.center)}")
        for sub in self.subdivide(cell):
            self.handle(sub)

    def build(self):
        for _, _, cell in self.cells():
            self.handle(cell)


class _ProductBuilder(_Builder):
    """Cells of ``T x R``: edge segments near the root, subtrees below level 3."""

    def tree_pieces(self):
        tree = self.space.tree
        pieces = []
        top = min(3, tree.depth)
        for n in range(1, top + 1):
            length = tree.edge_length(n)
            segs = max(1, int(length / Fraction(1, 4)))
            seg = length / segs
            for p in tree.nodes(n):
                if len(p.address) != n:
                    continue
                for s in range(segs):
                    off = seg * s + seg / 2
                    pieces.append((TreePoint(p.address, off, False), (seg / 2) ** 2))
        below = 1 - node_depth(top)
        for p in tree.nodes(top):
            if len(p.address) == top:
                pieces.append((p, below * below))
        pieces.sort(key=lambda t: (t[0].address, t[0].offset))
        return pieces

    def build(self):
        h = Fraction(1, 4)
        pieces = self.tree_pieces()
        kmax = math.ceil((self.R + 1) / h)
        cells = []
        for j in range(-kmax, kmax + 1):
            t = h * j
            for x, rho_sq in pieces:
                c = ProductPoint(x, t)
                r2 = rho_sq + (h / 2) ** 2
                d2 = self.space.distance_sq(c, self.star)
                if not sqrt_le_sum(d2, self.R, r2):
                    continue
                n = 1
                while not sqrt_le_sum(d2, Fraction(n), r2):
                    n += 1
                cells.append((n, abs(j), j, x.address, x.offset, _Cell(c, r2, None, 0)))
        cells.sort(key=lambda t: t[:5])
        for *_, cell in cells:
            if self.covered(cell):
                continue
            if not self.try_cover(cell, [cell.center]):
                raise CoverError(f"could not cover the cell at {point_label(cell.center)}")


def build_good_cover(space, group, window_R, policy: CoverPolicy | None = None, basepoint=None) -> GoodCover:
    """Equivariant good cover of the window ``B_R(*)`` by orbit bundles of balls."""
    policy = policy or CoverPolicy()
    window_R = frac(window_R)
    if window_R <= 0:
        raise ValueError("window radius must be positive")
    if group.space != space:
        raise ValueError("group does not act on this space")
    basepoint = space.origin() if basepoint is None else basepoint
    if isinstance(space, EuclideanSpace):
        b = _EuclideanBuilder(space, group, window_R, policy, basepoint)
    elif isinstance(space, ProductSpace):
        b = _ProductBuilder(space, group, window_R, policy, basepoint)
    else:
        raise CoverError(f"no cover construction for {space!r}")
    b.build()
    return GoodCover(space, group, window_R, basepoint, b.window_balls(), b.orbit_reps, policy)


def cover_from_orbits(space, group, window_R, orbit_reps, policy=None, basepoint=None) -> GoodCover:
    """Window balls of the cover generated by given orbit representatives."""
    policy = policy or CoverPolicy()
    basepoint = space.origin() if basepoint is None else basepoint
    b = _Builder(space, group, window_R, policy, basepoint)
    b.orbit_reps = list(orbit_reps)
    return GoodCover(space, group, window_R, basepoint, b.window_balls(), b.orbit_reps, policy)


# ---------------------------------------------------------------------------
# verification


@dataclass
class CoverReport:
    invariant: bool
    good: bool
    covers_window: bool
    elements_checked: int
    balls: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.invariant and self.good and self.covers_window

    def as_dict(self) -> dict:
        return {
            "invariant": self.invariant,
            "good": self.good,
            "covers_window": self.covers_window,
            "elements_checked": self.elements_checked,
            "balls": self.balls,
            "violations": self.violations[:10],
        }


def _int_ready(cover, elements) -> bool:
    if not isinstance(cover.space, EuclideanSpace):
        return False
    if any(Length(b.radius_sq).exact() is None for b in cover.balls):
        return False
    return all(x.denominator == 1 for g in elements for row in g.matrix for x in row)


def verify_good_cover(cover: GoodCover, sample_points=None) -> CoverReport:
    """Exhaustive windowed check of the good-cover conditions.

    Every element moving some window ball to another window ball moves the
    basepoint by at most ``2R + 2 * maxradius``; all of them are checked.
    """
    bound = 2 * cover.window_R + 2 * cover.max_radius
    elements = cover.group.enumerate(bound, cover.basepoint)
    if _int_ready(cover, elements):
        invariant, good, violations = _verify_int(cover, elements)
    else:
        invariant, good, violations = _verify_exact(cover, elements)
    covers = True
    pool = _Pool(_euclid_key if isinstance(cover.space, EuclideanSpace) else _product_key)
    for b in cover.balls:
        pool.add(b.center, b.radius_sq)
    for p in sample_points or ():
        if not any(
            sqrt_lt_sum(cover.space.distance_sq(p, c), ZERO, r2)
            for c, r2, rf in pool.near(p)
            if cover.space.float_distance(p, c) < rf + 1e-9
        ):
            covers = False
            violations.append(f"point {point_label(p)} uncovered")
    return CoverReport(invariant, good, covers, len(elements), len(cover.balls), violations)


def _verify_exact(cover, elements):
    space = cover.space
    invariant = good = True
    violations = []
    for g in elements:
        for i, b in enumerate(cover.balls):
            y = g(b.center)
            if cover.index_of(y, b.radius_sq) is None and cover.meets_window(y, b.radius_sq):
                invariant = False
                violations.append(f"translate of ball {i} missing")
            if y != b.center and sqrt_lt_sum(space.distance_sq(y, b.center), b.radius_sq, b.radius_sq):
                good = False
                violations.append(f"ball {i} meets a distinct translate")
    return invariant, good, violations


def _verify_int(cover, elements):
    space = cover.space
    dens = [x.denominator for b in cover.balls for x in b.center]
    dens += [x.denominator for g in elements for x in g.translation]
    dens += [x.denominator for x in cover.basepoint]
    frame = IntFrame(space.gram, dens)
    star = frame.point(cover.basepoint)
    R = cover.window_R
    balls = []
    for b in cover.balls:
        r = Length(b.radius_sq).exact()
        balls.append((frame.point(b.center), b.radius_sq, (R + r) ** 2, 4 * b.radius_sq))
    index = {(x, r2) for x, r2, _, _ in balls}
    invariant = good = True
    violations = []
    n = space.dim
    for g in elements:
        o = [[int(v) for v in row] for row in g.matrix]
        t = frame.point(g.translation)
        for i, (x, r2, win, meet) in enumerate(balls):
            y = tuple(sum(o[a][c] * x[c] for c in range(n)) + t[a] for a in range(n))
            if (y, r2) not in index and frame.below(frame.dist2(y, star), win):
                invariant = False
                violations.append(f"translate of ball {i} missing")
            if y != x and frame.below(frame.dist2(y, x), meet):
                good = False
                violations.append(f"ball {i} meets a distinct translate")
    return invariant, good, violations


def window_sample_points(cover: GoodCover, step: Fraction = Fraction(1, 8)) -> list:
    """Grid points of the window used as a covering spot-check."""
    space = cover.space
    if not isinstance(space, EuclideanSpace):
        return []
    R = cover.window_R
    m = math.ceil(R / step) + 1
    ginv = inverse(space.gram)
    reach = [math.ceil(m * math.sqrt(float(ginv[i][i]))) for i in range(space.dim)]
    out = []
    for k in iproduct(*(range(-r, r + 1) for r in reach)):
        p = tuple(s + step * ki for s, ki in zip(cover.basepoint, k))
        if space.distance_sq(p, cover.basepoint) <= R * R:
            out.append(p)
    return out
