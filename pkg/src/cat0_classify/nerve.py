"""Nerves of ball covers, the induced vertex action, fixed subcomplexes and
the restriction map onto the fixed set of a finite subgroup."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from fractions import Fraction

from .cover import GoodCover, _Pool, ball_label
from .exact import IntFrame, Length, inverse, solve, solve_affine, sqrt_lt_sum, vadd, vscale, vsub
from .simplicial import SimplicialComplex
from .spaces import Ball, DomainError, EuclideanSpace, ProductSpace


# ---------------------------------------------------------------------------
# nerves


def _pairs(space, centers, radii_sq):
    """Index pairs ``i < j`` of intersecting open balls."""
    floats = [float(Length(r)) for r in radii_sq]
    # cells wide enough that intersecting pairs are at most two cells apart:
    # |dx_i| <= sqrt((G^-1)_ii) * d by Cauchy-Schwarz
    reach = max(floats, default=0.0) * (1 + 1e-9) + 1e-12
    if isinstance(space, EuclideanSpace):
        ginv = inverse(space.gram)
        sides = [reach * math.sqrt(float(ginv[i][i])) for i in range(space.dim)]
        pool = _Pool(lambda p: tuple(math.floor(float(x) / h) for x, h in zip(p, sides)))
    else:
        pool = _Pool(lambda p: () if getattr(p, "t", None) is None else (math.floor(float(p.t) / reach),))
    for i, (c, r) in enumerate(zip(centers, radii_sq)):
        pool.cells.setdefault(pool.key(c), []).append((c, r, i))
    exact_r = [Length(r).exact() for r in radii_sq]
    frame = None
    if isinstance(space, EuclideanSpace) and all(r is not None for r in exact_r):
        frame = IntFrame(space.gram, [x.denominator for c in centers for x in c])
        ints = [frame.point(c) for c in centers]
    nbrs = {i: set() for i in range(len(centers))}
    for i, c in enumerate(centers):
        for _, _, j in pool.near(c):
            if j <= i:
                continue
            if space.float_distance(c, centers[j]) > floats[i] + floats[j] + 1e-9:
                continue
            if frame is not None:
                ok = frame.below(frame.dist2(ints[i], ints[j]), (exact_r[i] + exact_r[j]) ** 2)
            else:
                ok = sqrt_lt_sum(space.distance_sq(c, centers[j]), radii_sq[i], radii_sq[j])
            if ok:
                nbrs[i].add(j)
                nbrs[j].add(i)
    return nbrs


def _inside_all(space, x, balls) -> bool:
    return all(space.distance_sq(x, b.center) < b.radius_sq for b in balls)


def _common_point(space, balls) -> bool:
    """Cheap exact sufficient test: a centroid, centre or midpoint lies in every ball."""
    if not isinstance(space, EuclideanSpace):
        if any(_inside_all(space, b.center, balls) for b in balls):
            return True
        half = Fraction(1, 2)
        return any(
            _inside_all(space, space.geodesic_point(a.center, b.center, half), balls)
            for k, a in enumerate(balls) for b in balls[k + 1:]
        )
    n = len(balls)
    c = balls[0].center
    for b in balls[1:]:
        c = vadd(c, b.center)
    c = vscale(Fraction(1, n), c)
    return all(space.distance_sq(c, b.center) < b.radius_sq for b in balls)


def _fsolve(a, b):
    """Float Gaussian elimination with partial pivoting; None if singular."""
    n = len(a)
    m = [list(r) + [v] for r, v in zip(a, b)]
    for c in range(n):
        p = max(range(c, n), key=lambda i: abs(m[i][c]))
        if abs(m[p][c]) < 1e-12:
            return None
        m[c], m[p] = m[p], m[c]
        for i in range(n):
            if i != c:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def _float_optimum(gram, centers, radii_sq):
    """Weights of the float minimiser of the largest power ``|x - c|^2 - r^2``."""
    k, n = len(centers), len(centers[0])

    def ip(u, v):
        return sum(gram[i][j] * u[i] * v[j] for i in range(n) for j in range(n))

    best = None
    for size in range(1, min(k, n + 1) + 1):
        for sub in combinations(range(k), size):
            # x = sum lam_j c_j with equal powers across the subset
            rows, rhs = [[1.0] * size], [1.0]
            c0 = centers[sub[0]]
            for j in sub[1:]:
                cj = centers[j]
                diff = [a - b for a, b in zip(cj, c0)]
                rows.append([-2 * ip(diff, centers[i]) for i in sub])
                rhs.append(radii_sq[j] - radii_sq[sub[0]] - ip(cj, cj) + ip(c0, c0))
            lam = _fsolve(rows, rhs)
            if lam is None or min(lam) < -1e-9:
                continue
            x = [sum(l * centers[i][t] for l, i in zip(lam, sub)) for t in range(n)]
            powers = [ip([a - b for a, b in zip(x, c)], [a - b for a, b in zip(x, c)]) - r for c, r in zip(centers, radii_sq)]
            top = max(powers)
            if top - powers[sub[0]] > 1e-9:
                continue
            if best is None or top < best[0]:
                full = [0.0] * k
                for l, i in zip(lam, sub):
                    full[i] = max(l, 0.0)
                best = (top, x, full)
    return best


def _certified_intersect(space: EuclideanSpace, balls):
    """True/False with an exact certificate, or None when the floats are too close to call.

    A rational point inside every ball proves intersection. Rational weights
    ``lam`` with ``sum lam_i (|x_lam - c_i|^2 - r_i^2) >= 0`` at the weighted
    centre ``x_lam`` prove the open balls are disjoint, since the largest
    power is at least any weighted average of the powers everywhere.
    """
    gram = space._fgram
    centers = [[float(x) for x in b.center] for b in balls]
    radii = [float(b.radius_sq) for b in balls]
    opt = _float_optimum(gram, centers, radii)
    if opt is None:
        return None
    top, x, lam = opt
    scale = max(radii)
    if top < -1e-7 * scale:
        q = tuple(Fraction(v).limit_denominator(1 << 20) for v in x)
        if _inside_all(space, q, balls):
            return True
    elif top > 1e-7 * scale:
        ql = [Fraction(v).limit_denominator(1 << 16) for v in lam]
        total = sum(ql)
        if total > 0:
            ql = [v / total for v in ql]
            xq = balls[0].center
            xq = tuple(sum((w * b.center[t] for w, b in zip(ql, balls)), Fraction(0)) for t in range(len(xq)))
            value = sum((w * (space.distance_sq(xq, b.center) - b.radius_sq) for w, b in zip(ql, balls) if w), Fraction(0))
            if value >= 0:
                return False
    return None


def _intersect(space, group) -> bool:
    if _common_point(space, group):
        return True
    if isinstance(space, EuclideanSpace):
        out = _certified_intersect(space, group)
        if out is not None:
            return out
    return space.balls_intersect(group)


def nerve_of_balls(space, balls, labels=None, max_dim: int = 12) -> SimplicialComplex:
    """Simplices are the subsets of balls with a common point."""
    centers = [b.center for b in balls]
    radii = [b.radius_sq for b in balls]
    labels = labels or [ball_label(c, r) for c, r in zip(centers, radii)]
    nbrs = _pairs(space, centers, radii)
    cx = SimplicialComplex(dict(enumerate(labels)))
    layer = []
    for i in range(len(balls)):
        for j in nbrs[i]:
            if j > i:
                layer.append((i, j))
    cx._simplices.update(layer)
    line = isinstance(space, EuclideanSpace) and space.dim == 1
    dim = 1
    while layer and dim < max_dim:
        nxt = []
        for s in layer:
            common = set.intersection(*(nbrs[v] for v in s))
            for k in sorted(v for v in common if v > s[-1]):
                cand = s + (k,)
                # intervals on a line meet as soon as they meet pairwise
                if line or _intersect(space, [balls[v] for v in cand]):
                    nxt.append(cand)
        cx._simplices.update(nxt)
        layer = nxt
        dim += 1
    if layer:
        raise DomainError(f"nerve dimension exceeds the cap {max_dim}")
    return cx


class CoverAction:
    """Partial vertex permutations induced by group elements on a cover."""

    def __init__(self, cover: GoodCover):
        self.cover = cover
        self._cache: dict = {}

    def image(self, g, i: int):
        return self.cover.image(g, i)

    def permutation(self, g) -> dict:
        key = id(g)
        hit = self._cache.get(key)
        if hit is not None and hit[0] is g:
            return hit[1]
        perm = {}
        for i in range(len(self.cover)):
            j = self.image(g, i)
            if j is not None:
                perm[i] = j
        self._cache[key] = (g, perm)
        return perm

    def fixed_vertices(self, generators) -> set:
        out = set(range(len(self.cover)))
        for g in generators:
            perm = self.permutation(g)
            out = {i for i in out if perm.get(i) == i}
        return out

    def audit(self, complex_: SimplicialComplex, elements) -> "ActionAudit":
        """Equivariance and the pointwise-fixed property on every element."""
        equivariant = pointwise = True
        notes = []
        edges = complex_.simplices_of_dim(1)
        simplices = complex_.simplices
        # faces of a simplex map into the image simplex, so maximal ones suffice
        maximal = [s for s in complex_.maximal_simplices() if len(s) > 1]
        for g in elements:
            perm = self.permutation(g)
            if all(perm.get(v) == v for v in perm):
                continue
            for i, j in edges:
                if perm.get(i) == j or perm.get(j) == i:
                    pointwise = False
                    notes.append(f"edge {(i, j)} swapped")
            for s in maximal:
                img = tuple(sorted(perm[v] for v in s if v in perm))
                if len(img) > 1 and img not in simplices:
                    equivariant = False
                    notes.append(f"image of {s} is not a simplex")
        return ActionAudit(equivariant, pointwise, len(elements), notes[:10])


@dataclass
class ActionAudit:
    equivariant: bool
    pointwise_fixed: bool
    elements: int
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.equivariant and self.pointwise_fixed


def nerve(cover: GoodCover):
    """The nerve of the window cover and the induced vertex action."""
    balls = [b.ball for b in cover.balls]
    labels = [cover.label(i) for i in range(len(cover))]
    return nerve_of_balls(cover.space, balls, labels), CoverAction(cover)


def fixed_subcomplex(complex_: SimplicialComplex, action: CoverAction, generators) -> SimplicialComplex:
    """Full subcomplex on the balls fixed by every generator."""
    return complex_.full_subcomplex(action.fixed_vertices(list(generators)))


# ---------------------------------------------------------------------------
# fixed sets in the model space and the restriction map


@dataclass(frozen=True)
class AffineSubspace:
    point: tuple
    basis: tuple

    @property
    def dim(self) -> int:
        return len(self.basis)


def fixed_set(space, generators):
    """``Fix_X(H)``: an :class:`AffineSubspace`, the whole space, or None."""
    if isinstance(space, ProductSpace):
        if all(g.is_identity for g in generators):
            return "all"
        if all(g.shift == 0 for g in generators):
            raise DomainError("fixed sets of nontrivial tree automorphisms are not affine")
        return None
    n = space.dim
    rows, rhs = [], []
    for g in generators:
        for i in range(n):
            rows.append([g.matrix[i][j] - (1 if i == j else 0) for j in range(n)])
            rhs.append(-g.translation[i])
    if not rows:
        return AffineSubspace(space.origin(), tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))
    sol = solve_affine(rows, rhs)
    if sol is None:
        return None
    return AffineSubspace(tuple(sol[0]), tuple(sol[1]))


def _coords_in(space, F: AffineSubspace, x):
    """Coordinates of the projection of ``x`` onto ``F`` and its squared distance."""
    if not F.basis:
        return (), space.distance_sq(x, F.point)
    m = [[space.inner(u, w) for w in F.basis] for u in F.basis]
    diff = vsub(x, F.point)
    coef = solve(m, [space.inner(u, diff) for u in F.basis])
    p = F.point
    for c, u in zip(coef, F.basis):
        p = vadd(p, vscale(c, u))
    return tuple(coef), space.distance_sq(x, p)


@dataclass
class RestrictionMap:
    """``rho``: fixed subcomplex -> nerve of the cover restricted to ``Fix_X(H)``."""

    source: SimplicialComplex
    target: SimplicialComplex
    vertex_map: dict
    fixed_dim: int | None
    scans_agree: bool
    fibers_checked: int = 0
    fibers_ok: int = 0
    simplicial: bool = True

    @property
    def fiber_property(self) -> bool:
        return self.simplicial and self.fibers_checked == self.fibers_ok

    def as_dict(self) -> dict:
        return {
            "fixed_dim": self.fixed_dim,
            "source_simplices": len(self.source),
            "target_simplices": len(self.target),
            "scans_agree": self.scans_agree,
            "fibers_checked": self.fibers_checked,
            "fibers_ok": self.fibers_ok,
            "simplicial": self.simplicial,
        }


def restriction_map(complex_, action: CoverAction, generators, space, cover: GoodCover) -> RestrictionMap:
    """Send each ball ``U`` to ``U ∩ Fix_X(H)`` and certify the fiber property."""
    generators = list(generators)
    source = fixed_subcomplex(complex_, action, generators)
    F = fixed_set(space, generators)
    if F is None:
        target = SimplicialComplex()
        return RestrictionMap(source, target, {}, None, scans_agree=source.is_empty)
    if F == "all":
        vmap = {v: v for v in source.vertices}
        target = complex_
        rm = RestrictionMap(source, target, vmap, None, scans_agree=True)
        return _check_fibers(rm)
    # restricted balls inside F
    res_idx, res_balls = [], []
    meets = set()
    for i, b in enumerate(cover.balls):
        y, d2 = _coords_in(space, F, b.center)
        if d2 < b.radius_sq:
            meets.add(i)
            res_idx.append(i)
            res_balls.append(Ball(y, b.radius_sq - d2))
    scans_agree = meets == set(source.vertices)
    if F.dim == 0:
        target = SimplicialComplex({k: cover.label(i) for k, i in enumerate(res_idx)})
        if res_idx:
            target.add_simplex(range(len(res_idx)))
    else:
        gram = tuple(tuple(space.inner(u, w) for w in F.basis) for u in F.basis)
        sub = EuclideanSpace(F.dim, gram)
        target = nerve_of_balls(sub, res_balls, [cover.label(i) for i in res_idx])
    inv = {i: k for k, i in enumerate(res_idx)}
    vmap = {v: inv[v] for v in source.vertices if v in inv}
    rm = RestrictionMap(source, target, vmap, F.dim, scans_agree)
    return _check_fibers(rm)


def _check_fibers(rm: RestrictionMap) -> RestrictionMap:
    src, tgt, vmap = rm.source, rm.target, rm.vertex_map
    if set(vmap) != set(src.vertices):
        rm.simplicial = False
    for s in src.simplices:
        img = tuple(sorted({vmap.get(v, -1) for v in s}))
        if img not in tgt:
            rm.simplicial = False
            break
    pre: dict = {}
    for v, w in vmap.items():
        pre.setdefault(w, []).append(v)
    checked = ok = 0
    for t in tgt.simplices:
        verts = [v for w in t for v in pre.get(w, ())]
        checked += 1
        if verts and tuple(sorted(verts)) in src:
            ok += 1
    rm.fibers_checked, rm.fibers_ok = checked, ok
    return rm
