"""Models for classifying spaces of the families FIN, VC and FBC.

``build_EFIN`` takes the nerve of a good cover of the model space,
``build_EVC`` joins it with the nerve of a good cover of the space of axes,
and ``build_EFBC`` joins it with the quotient ``K`` of the doubled axes
nerve times a cross-polytope sphere. Each model is verified row by row
against a battery of subgroups.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .axes import (
    AxesSpace,
    Subtree,
    axes_space,
    induced_group,
    well_behaved_check,
)
from .cover import (
    CoverPolicy,
    CoverBall,
    GoodCover,
    build_good_cover,
    cover_from_orbits,
    verify_good_cover,
)
from .exact import ZERO, frac, integer_row_basis, matmul
from .isometries import (
    CrystallographicGroup,
    EuclideanIsometry,
    OdometerGroup,
    TrivialGroup,
    _iso_key,
    classify,
)
from .lines import VERTICAL, euclidean_line, parallel_class, vertical_line
from .nerve import CoverAction, nerve, nerve_of_balls, restriction_map
from .simplicial import ChainComplex, HomologyResult, SimplicialComplex, collapse, join_collapsible
from .spaces import DomainError, EuclideanSpace, ProductPoint, ProductSpace, TreePoint

FIN = "FIN"
FBC_INF = "FBC_INF"
VC_INF_NOT_FBC = "VC_INF_NOT_FBC"
NOT_VC = "NOT_VC"
INDETERMINATE = "INDETERMINATE"

FAMILIES = {
    "fin": {FIN},
    "fbc": {FIN, FBC_INF},
    "vc": {FIN, FBC_INF, VC_INF_NOT_FBC},
}


class RefusalError(RuntimeError):
    """A construction whose preconditions fail at the requested scale."""


# ---------------------------------------------------------------------------
# subgroup families


@dataclass(frozen=True)
class FamilyTag:
    tag: str
    evidence: dict = field(default_factory=dict, compare=False)

    def member_of(self, family: str) -> bool:
        return self.tag in FAMILIES[family]


def _det(m) -> Fraction:
    m = [list(r) for r in m]
    n, sign, out = len(m), 1, Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return ZERO
        if p != c:
            m[c], m[p] = m[p], m[c]
            sign = -sign
        out *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return sign * out


def _order(m, cap: int = 24) -> int:
    ident = EuclideanIsometry.identity(len(m)).matrix
    p = m
    for k in range(1, cap + 1):
        if p == ident:
            return k
        p = matmul(p, m)
    raise DomainError("linear part has no finite order")


def classify_family(group, generators, bound=None) -> FamilyTag:
    """FIN, FBC_INF, VC_INF_NOT_FBC or NOT_VC for ``<generators>``.

    For crystallographic groups the translation subgroup of ``H`` is
    generated by Schreier words over a transversal of its linear image, so
    the answer is exact. ``bound`` only checks that the generators are
    window elements.
    """
    gens = list(generators)
    space = group.space
    if bound is not None:
        bound = frac(bound)
        base = space.origin()
        for g in gens:
            if space.distance_sq(g(base), base) > bound * bound:
                return FamilyTag(INDETERMINATE, {"reason": "generator outside the window"})
    if isinstance(space, ProductSpace):
        shifts = sorted({abs(g.shift) for g in gens if g.shift != 0})
        if not shifts:
            return FamilyTag(FIN, {"shifts": []})
        return FamilyTag(FBC_INF, {"shifts": [str(s) for s in shifts], "image": "translations"})
    if not isinstance(space, EuclideanSpace):
        return FamilyTag(INDETERMINATE, {"reason": "unsupported space"})
    n = space.dim
    words = gens + [g.inverse() for g in gens]
    reps = {EuclideanIsometry.identity(n).matrix: EuclideanIsometry.identity(n)}
    queue = [EuclideanIsometry.identity(n)]
    translations = []
    while queue:
        r = queue.pop(0)
        for g in words:
            h = r * g
            rep = reps.get(h.matrix)
            if rep is None:
                if len(reps) > 48:
                    return FamilyTag(INDETERMINATE, {"reason": "linear image is not finite"})
                reps[h.matrix] = h
                queue.append(h)
                continue
            t = (h * rep.inverse()).translation
            if any(t):
                translations.append(t)
    basis = integer_row_basis(translations) if translations else []
    r = len(basis)
    evidence = {"linear_image": len(reps), "translation_rank": r, "translations": [[str(x) for x in v] for v in basis]}
    if r == 0:
        evidence["order"] = len(reps)
        return FamilyTag(FIN, evidence)
    if r >= 2:
        return FamilyTag(NOT_VC, evidence)
    d = tuple(basis[0])
    neg = tuple(-x for x in d)
    reversing = [m for m in reps if EuclideanIsometry(m, (ZERO,) * n).apply_direction(d) == neg]
    evidence["reversing"] = len(reversing)
    if reversing:
        evidence["image"] = "infinite dihedral"
        return FamilyTag(VC_INF_NOT_FBC, evidence)
    evidence["image"] = "translations"
    return FamilyTag(FBC_INF, evidence)


# ---------------------------------------------------------------------------
# batteries


@dataclass(frozen=True)
class BatteryRow:
    name: str
    generators: tuple
    expected: str


def _lattice_vectors(group: CrystallographicGroup, reach: int = 3):
    cols = list(zip(*group.lattice))
    out = []
    for coef in product(range(-reach, reach + 1), repeat=len(cols)):
        if not any(coef) or math.gcd(*coef) != 1:
            continue
        v = tuple(sum((c * col[i] for c, col in zip(coef, cols)), ZERO) for i in range(group.space.dim))
        out.append(v)
    out.sort(key=lambda v: (group.space.norm_sq(v), v))
    return out


def default_battery(group) -> list:
    """Trivial, finite cyclic, mirror, Z, glide, D_inf and Z^2 rows that exist in ``group``."""
    rows = [BatteryRow("trivial", (), FIN)]
    space = group.space
    if isinstance(group, OdometerGroup):
        rows.append(BatteryRow("translation-Z", (group.gamma,), FBC_INF))
        return rows
    if isinstance(group, TrivialGroup) or not isinstance(group, CrystallographicGroup):
        return rows
    origin = space.origin()
    els = group.enumerate(2 * group.delta_bound, origin)
    at_origin = [g for g in els if g(origin) == origin and not g.is_identity]
    for k in (2, 3, 4, 6):
        rot = [g for g in at_origin if _det(g.matrix) == 1 and _order(g.matrix) == k]
        if rot:
            rows.append(BatteryRow(f"cyclic-{k}", (min(rot, key=_iso_key),), FIN))
    mirrors = [g for g in at_origin if _det(g.matrix) == -1 and _order(g.matrix) == 2]
    if mirrors:
        rows.append(BatteryRow("mirror", (min(mirrors, key=_iso_key),), FIN))
    lattice = _lattice_vectors(group)
    t1 = EuclideanIsometry.translation_by(tuple(c for c in next(zip(*group.lattice))))
    rows.append(BatteryRow("translation-Z", (t1,), FBC_INF))
    glides = []
    for g in els:
        if _det(g.matrix) == -1:
            c = classify(group, g)
            if c.kind == "hyperbolic":
                glides.append((c.translation_sq, _iso_key(g), g))
    if glides:
        rows.append(BatteryRow("glide-Z", (min(glides, key=lambda x: x[:2])[2],), FBC_INF))
    involutions = sorted(
        (g for g in at_origin if _order(g.matrix) == 2),
        key=lambda g: (-_det(g.matrix) if _det(g.matrix) < 0 else 1, _iso_key(g)),
    )
    for r1 in involutions:
        v = next((v for v in lattice if r1.apply_direction(v) == tuple(-x for x in v)), None)
        if v is not None:
            r2 = EuclideanIsometry.translation_by(v) * r1
            rows.append(BatteryRow("D_inf", (r1, r2), VC_INF_NOT_FBC))
            break
    if len(group.lattice[0]) >= 2:
        cols = list(zip(*group.lattice))
        rows.append(BatteryRow("Z^2", tuple(EuclideanIsometry.translation_by(c) for c in cols[:2]), NOT_VC))
    return rows


# ---------------------------------------------------------------------------
# verification rows


@dataclass
class RowResult:
    name: str
    expected: str
    observed: str
    in_family: bool
    certificate: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "expected": self.expected,
            "observed": self.observed,
            "in_family": self.in_family,
            "certificate": self.certificate,
            "passed": self.passed,
            "detail": self.detail,
        }


@dataclass
class Verification:
    family: str
    rows: list
    checks: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows) and all(v for v in self.checks.values() if isinstance(v, bool))

    def row(self, name: str) -> RowResult:
        return next(r for r in self.rows if r.name == name)

    def as_dict(self) -> dict:
        return {"family": self.family, "passed": self.passed, "checks": self.checks, "rows": [r.as_dict() for r in self.rows]}


def map_rows(fn, battery, workers: int = 1) -> list:
    """Rows are independent; results keep the battery order."""
    if workers <= 1 or len(battery) < 2:
        return [fn(b) for b in battery]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, battery))


def _window_elements(cover: GoodCover):
    bound = 2 * cover.window_R + 2 * cover.max_radius
    return cover.group.enumerate(bound, cover.basepoint)


# ---------------------------------------------------------------------------
# E_FIN


@dataclass
class EFINModel:
    group: object
    cover: GoodCover
    complex: SimplicialComplex
    action: CoverAction
    cover_report: object

    @property
    def local_finiteness(self) -> int:
        return self.complex.dim + 1

    def fixed(self, generators) -> SimplicialComplex:
        return self.complex.full_subcomplex(self.action.fixed_vertices(list(generators)))

    def metadata(self) -> dict:
        return {
            "balls": len(self.cover),
            "orbits": len(self.cover.orbit_reps),
            "nerve_dim": self.complex.dim,
            "nerve_simplices": len(self.complex),
            "local_finiteness_M": self.local_finiteness,
            "cover": self.cover_report.as_dict(),
        }


def build_EFIN(group, window_R, policy: CoverPolicy | None = None, max_M: int = 64) -> EFINModel:
    cover = build_good_cover(group.space, group, window_R, policy)
    report = verify_good_cover(cover)
    cx, action = nerve(cover)
    if cx.dim + 1 > max_M:
        raise RefusalError(f"local finiteness {cx.dim + 1} exceeds the cap {max_M}")
    return EFINModel(group, cover, cx, action, report)


def verify_EFIN(model: EFINModel, battery=None, check_restriction: bool = True, workers: int = 1) -> Verification:
    group = model.group
    battery = default_battery(group) if battery is None else battery
    audit = model.action.audit(model.complex, _window_elements(model.cover))
    checks = {
        "cover_good": model.cover_report.ok,
        "equivariant": audit.equivariant,
        "invariant_simplices_pointwise_fixed": audit.pointwise_fixed,
        "local_finiteness_M": model.local_finiteness,
    }

    def _row(b):
        tag = classify_family(group, b.generators)
        member = tag.member_of("fin")
        fx = model.fixed(b.generators)
        detail = {"fixed_vertices": len(fx.vertices), "fixed_simplices": len(fx)}
        if member:
            col = collapse(fx)
            ok = col.collapsed_to_point
            cert = "collapse"
            detail["collapse_steps"] = len(col.steps)
            if check_restriction and isinstance(group.space, EuclideanSpace):
                rm = restriction_map(model.complex, model.action, b.generators, group.space, model.cover)
                hs, ht = rm.source.homology(collapse=False), rm.target.homology(collapse=False)
                agree = (hs.betti, hs.torsion, hs.empty) == (ht.betti, ht.torsion, ht.empty)
                detail["restriction"] = rm.as_dict() | {"homology_agrees": agree}
                ok = ok and rm.fiber_property and rm.scans_agree and agree
        else:
            ok = fx.is_empty
            cert = "exact"
        return RowResult(b.name, b.expected, tag.tag, member, cert, ok and tag.tag == b.expected, detail)

    rows = map_rows(_row, battery, workers)
    return Verification("fin", rows, checks)


# ---------------------------------------------------------------------------
# covers of the space of axes


def transport_axis(space, classes: dict, g, direction, y):
    """Image of the axis with base point ``y`` in the class of ``direction``.

    ``classes`` maps directions to parallel classes. Returns (direction,
    base point, sheet flip) or None when the target class is absent.
    """
    if direction == VERTICAL:
        return VERTICAL, g.tree(y), False
    pc = classes[direction]
    line = pc.from_base(y)
    od = g.apply_direction(direction)
    target = min(od, tuple(-x for x in od))
    dst = classes.get(target)
    if dst is None:
        return None
    image = euclidean_line(space, g(line.anchor), od)
    return target, dst.to_base(image), od != target


def _dir_text(d) -> str:
    return "vertical" if d == VERTICAL else ",".join(str(x) for x in d)


@dataclass
class AxesCover:
    """A good cover of the axes space, one base cover per parallel class."""

    axes: AxesSpace
    directions: list
    covers: list  # GoodCover per class, in class order
    complex: SimplicialComplex = None
    offsets: list = None

    def __post_init__(self):
        self.classes = {c.direction: c.pclass for c in self.axes.classes}
        self.offsets, labels, n = [], {}, 0
        for d, cov in zip(self.directions, self.covers):
            self.offsets.append(n)
            for i in range(len(cov)):
                labels[n + i] = f"A[{_dir_text(d)}]|{cov.label(i)}"
            n += len(cov)
        cx = SimplicialComplex(labels)
        for k, cov in enumerate(self.covers):
            local = nerve_of_balls(cov.space, [b.ball for b in cov.balls]) if len(cov) else SimplicialComplex()
            off = self.offsets[k]
            cx._simplices.update(tuple(v + off for v in s) for s in local.simplices)
        self.complex = cx
        self._where = {}
        for k, cov in enumerate(self.covers):
            for i in range(len(cov)):
                self._where[self.offsets[k] + i] = (k, i)
        self._dir_index = {d: k for k, d in enumerate(self.directions)}

    def __len__(self):
        return len(self.complex.vertices)

    def image(self, g, v: int):
        """(vertex, sheet flip) of ``g`` applied to vertex ``v``, or None."""
        k, i = self._where[v]
        ball = self.covers[k].balls[i]
        out = transport_axis(self.axes.space, self.classes, g, self.directions[k], ball.center)
        if out is None:
            return None
        d, y, flip = out
        j = self._dir_index.get(d)
        if j is None:
            return None
        idx = self.covers[j].index_of(y, ball.radius_sq)
        if idx is None:
            return None
        return self.offsets[j] + idx, flip


class AxesAction:
    """Vertex action on the axes nerve, optionally remembering sheets."""

    def __init__(self, axes_cover: AxesCover):
        self.axes_cover = axes_cover
        self._cache = {}

    def permutation(self, g) -> dict:
        hit = self._cache.get(id(g))
        if hit is not None and hit[0] is g:
            return hit[1]
        perm = {}
        for v in self.axes_cover.complex.vertices:
            out = self.axes_cover.image(g, v)
            if out is not None:
                perm[v] = out
        self._cache[id(g)] = (g, perm)
        return perm

    def fixed_vertices(self, generators, sheets: bool = False) -> set:
        out = set(self.axes_cover.complex.vertices)
        for g in generators:
            perm = self.permutation(g)
            out = {v for v in out if v in perm and perm[v][0] == v and not (sheets and perm[v][1])}
        return out

    def audit(self, elements) -> dict:
        cx = self.axes_cover.complex
        maximal = [s for s in cx.maximal_simplices() if len(s) > 1]
        equivariant = pointwise = True
        for g in elements:
            perm = {v: w for v, (w, _) in self.permutation(g).items()}
            for i, j in cx.simplices_of_dim(1):
                if perm.get(i) == j or perm.get(j) == i:
                    pointwise = False
            for s in maximal:
                img = tuple(sorted(perm[v] for v in s if v in perm))
                if len(img) > 1 and img not in cx:
                    equivariant = False
        return {"equivariant": equivariant, "pointwise_fixed": pointwise}


def build_axes_cover(group, A: AxesSpace, window_R, policy: CoverPolicy | None = None) -> AxesCover:
    space = group.space
    if isinstance(space, ProductSpace):
        members = A.classes[0].members if A.classes else None
        if not isinstance(members, Subtree) or members.max_level != 0:
            raise RefusalError("only the root line is supported as the axes space of the tree product")
        tree = space.tree
        root = tree.root()
        cov = GoodCover(tree, TrivialGroup(tree), window_R, root, [CoverBall(root, Fraction(1, 16), 0)], [(root, Fraction(1, 16))], policy or CoverPolicy())
        return AxesCover(A, [VERTICAL], [cov])
    directions = [c.direction for c in A.classes]
    classes = {c.direction: c.pclass for c in A.classes}
    covers: dict = {}
    pg = [EuclideanIsometry(o, t) for o, t in group.point_group]
    for d in directions:
        if d in covers:
            continue
        base_group = induced_group(group, classes[d])
        cov = build_good_cover(base_group.space, base_group, window_R, policy)
        covers[d] = cov
        for g in pg:
            out = transport_axis(space, classes, g, d, base_group.space.origin())
            if out is None:
                raise RefusalError(f"axes space is not invariant under the point group at direction {d}")
            target = out[0]
            if target in covers:
                continue
            reps = [(transport_axis(space, classes, g, d, c)[1], r2) for c, r2 in cov.orbit_reps]
            tg = induced_group(group, classes[target])
            covers[target] = cover_from_orbits(tg.space, tg, window_R, reps, policy)
    return AxesCover(A, directions, [covers[d] for d in directions])


# ---------------------------------------------------------------------------
# joins


class JoinComplex:
    """``X * Y``: simplices ``sigma ⊔ tau`` with either part possibly empty."""

    def __init__(self, left: SimplicialComplex, right: SimplicialComplex):
        self.left, self.right = left, right
        self.offset = max(left.labels, default=-1) + 1
        self.labels = {v: f"X:{left.labels[v]}" for v in left.labels}
        self.labels.update({v + self.offset: f"Y:{right.labels[v]}" for v in right.labels})

    def __len__(self):
        return (len(self.left) + 1) * (len(self.right) + 1) - 1

    @property
    def dim(self) -> int:
        return self.left.dim + self.right.dim + 1

    @property
    def is_empty(self) -> bool:
        return self.left.is_empty and self.right.is_empty

    def split(self, s):
        return tuple(v for v in s if v < self.offset), tuple(v - self.offset for v in s if v >= self.offset)

    def __contains__(self, s) -> bool:
        s = tuple(sorted(s))
        if not s:
            return False
        x, y = self.split(s)
        return (not x or x in self.left) and (not y or y in self.right)

    def simplices(self):
        rs = [()] + sorted(tuple(v + self.offset for v in t) for t in self.right.simplices)
        for x in [()] + sorted(self.left.simplices):
            for y in rs:
                if x or y:
                    yield x + y

    def full_subcomplex_size(self, vertices) -> int:
        """Count simplices of the join spanned by ``vertices`` by direct scan."""
        keep = set(vertices)
        return sum(1 for s in self.simplices() if keep.issuperset(s))

    def collapsible(self) -> bool:
        return join_collapsible(self.left, self.right)

    def to_text(self) -> str:
        lines = [f"v {v} {self.labels[v]}" for v in sorted(self.labels)]
        lm = self.left.maximal_simplices() or [()]
        rm = [tuple(v + self.offset for v in t) for t in self.right.maximal_simplices()] or [()]
        for x in lm:
            for y in rm:
                if len(x + y) > 1:
                    lines.append("s " + " ".join(map(str, x + y)))
        return "\n".join(lines) + "\n"


def fix_join_identity(join_cx: JoinComplex, left_fixed: set, right_fixed: set) -> dict:
    """Compare the full subcomplex of the join on fixed vertices with the join of fixed parts.

    The left side is found by scanning every simplex of the join; the right
    side is built from the factors. Equality is exact: the scan must land
    inside the join of fixed parts and have the same number of simplices.
    """
    keep = set(left_fixed) | {v + join_cx.offset for v in right_fixed}
    rhs = JoinComplex(join_cx.left.full_subcomplex(left_fixed), join_cx.right.full_subcomplex(right_fixed))
    lhs_count = inside = 0
    for s in join_cx.simplices():
        if keep.issuperset(s):
            lhs_count += 1
            x, y = join_cx.split(s)
            if (not x or x in rhs.left) and (not y or y in rhs.right):
                inside += 1
    return {"holds": lhs_count == inside == len(rhs), "lhs": lhs_count, "rhs": len(rhs), "rhs_complex": rhs}


# ---------------------------------------------------------------------------
# E_VC


@dataclass
class EVCModel:
    group: object
    efin: EFINModel
    axes: AxesSpace
    axes_cover: AxesCover
    axes_action: AxesAction
    join: JoinComplex
    well_behaved: object

    def metadata(self) -> dict:
        return self.efin.metadata() | {
            "axes_choice": self.axes.choice,
            "axes_classes": len(self.axes.classes),
            "axes_balls": len(self.axes_cover),
            "axes_nerve_dim": self.axes_cover.complex.dim,
            "axes_nerve_simplices": len(self.axes_cover.complex),
            "join_dim": self.join.dim,
            "join_simplices": len(self.join),
            "well_behaved": self.well_behaved.as_dict(),
        }


def _refuse_unless_well_behaved(A, group, bound, seed):
    report = well_behaved_check(A, group, bound, seed=seed)
    if not report.ok:
        raise RefusalError("axes space is not well behaved: " + ", ".join(report.failing()))
    return report


def build_EVC(group, window_R, axes_bound=1, axes_choice: str = "enumerated", policy=None, seed: int = 0, efin=None) -> EVCModel:
    A = axes_space(group, axes_choice, axes_bound)
    report = _refuse_unless_well_behaved(A, group, axes_bound, seed)
    efin = efin or build_EFIN(group, window_R, policy)
    ac = build_axes_cover(group, A, window_R, policy)
    return EVCModel(group, efin, A, ac, AxesAction(ac), JoinComplex(efin.complex, ac.complex), report)


def verify_EVC(model: EVCModel, battery=None, workers: int = 1) -> Verification:
    group = model.group
    battery = default_battery(group) if battery is None else battery
    elements = _window_elements(model.efin.cover)
    audit_u = model.efin.action.audit(model.efin.complex, elements)
    audit_v = model.axes_action.audit(elements)
    checks = {
        "cover_good": model.efin.cover_report.ok,
        "equivariant": audit_u.equivariant and audit_v["equivariant"],
        "invariant_simplices_pointwise_fixed": audit_u.pointwise_fixed and audit_v["pointwise_fixed"],
        "well_behaved": model.well_behaved.ok,
        "local_finiteness_M": model.efin.local_finiteness,
    }

    def _row(b):
        tag = classify_family(group, b.generators)
        member = tag.member_of("vc")
        fu = model.efin.action.fixed_vertices(b.generators)
        fv = model.axes_action.fixed_vertices(b.generators)
        ident = fix_join_identity(model.join, fu, fv)
        rhs = ident.pop("rhs_complex")
        detail = {"fix_join_identity": ident, "fixed_U": len(rhs.left), "fixed_V": len(rhs.right)}
        if member:
            ok = rhs.collapsible()
            cert = "collapse"
        else:
            ok = rhs.is_empty
            cert = "exact"
        passed = ok and ident["holds"] and tag.tag == b.expected
        return RowResult(b.name, b.expected, tag.tag, member, cert, passed, detail)

    rows = map_rows(_row, battery, workers)
    return Verification("vc", rows, checks)


# ---------------------------------------------------------------------------
# spheres, the doubled axes nerve and the quotient K


class SphereModel:
    """Boundary of the cross-polytope: ``S^N`` with vertices ``±e_j``.

    Vertex ``2j`` is ``+e_j`` and ``2j + 1`` is ``-e_j``; the antipodal map
    flips the low bit.
    """

    def __init__(self, N: int):
        if N < 0:
            raise ValueError("sphere dimension must be non-negative")
        self.N = N
        labels = {2 * j + s: f"S:{'+-'[s]}e{j}" for j in range(N + 1) for s in (0, 1)}
        cx = SimplicialComplex(labels)
        for choice in product((None, 0, 1), repeat=N + 1):
            s = tuple(2 * j + c for j, c in enumerate(choice) if c is not None)
            if s:
                cx._simplices.add(s)
        self.complex = cx

    @staticmethod
    def antipode(s):
        return tuple(v ^ 1 for v in s)

    def antipodal_free(self) -> bool:
        return all(not set(s) & set(self.antipode(s)) for s in self.complex.simplices)


class DoubledAxesNerve:
    """Nerve of the doubled cover: two sheet copies of the axes nerve.

    Vertex ``2v`` lies on the ``+`` sheet over ``v`` and ``2v + 1`` on the
    ``-`` sheet; the sheet swap ``i`` flips the low bit.
    """

    def __init__(self, axes_cover: AxesCover, action: AxesAction):
        self.axes_cover, self.action = axes_cover, action
        base = axes_cover.complex
        labels = {}
        for v in base.vertices:
            labels[2 * v] = f"U:+|{base.labels[v]}"
            labels[2 * v + 1] = f"U:-|{base.labels[v]}"
        cx = SimplicialComplex(labels)
        for s in base.simplices:
            for sheet in (0, 1):
                cx._simplices.add(tuple(2 * v + sheet for v in s))
        self.complex = cx

    @staticmethod
    def involution(s):
        return tuple(v ^ 1 for v in s)

    def involution_free(self) -> bool:
        return all(v ^ 1 != v for v in self.complex.vertices)

    def permutation(self, g) -> dict:
        out = {}
        for v, (w, flip) in self.action.permutation(g).items():
            out[2 * v] = 2 * w + int(flip)
            out[2 * v + 1] = 2 * w + 1 - int(flip)
        return out

    def fixed_vertices(self, generators) -> set:
        out = set(self.complex.vertices)
        for g in generators:
            perm = self.permutation(g)
            out = {v for v in out if perm.get(v) == v}
        return out


class QuotientK:
    """Cells ``[(sigma, tau)] = {(sigma, tau), (i sigma, a tau)}`` of ``(N(Ū) x S^N)/~``.

    Both involutions preserve the vertex order inside a simplex, so the
    identification preserves product orientations and every sign in the
    quotient boundary is inherited from the product rule.
    """

    def __init__(self, doubled: DoubledAxesNerve, sphere: SphereModel):
        self.doubled, self.sphere = doubled, sphere
        self.N = sphere.N

    def canonical(self, sigma, tau):
        other = (DoubledAxesNerve.involution(sigma), SphereModel.antipode(tau))
        return min((sigma, tau), other)

    def cells(self, sigma_set=None):
        """All canonical cells whose first factor lies in ``sigma_set``."""
        sigmas = sorted(self.doubled.complex.simplices if sigma_set is None else sigma_set)
        taus = sorted(self.sphere.complex.simplices)
        out = set()
        for s in sigmas:
            for t in taus:
                out.add(self.canonical(s, t))
        return sorted(out, key=lambda c: (len(c[0]) + len(c[1]), c))

    def quotient_free(self) -> bool:
        """``(sigma, tau) != (i sigma, a tau)`` for every product cell."""
        return self.doubled.involution_free() and self.sphere.antipodal_free()

    def boundary(self, cell) -> dict:
        sigma, tau = cell
        out: dict = {}
        if len(sigma) > 1:
            for k in range(len(sigma)):
                f = self.canonical(sigma[:k] + sigma[k + 1:], tau)
                out[f] = out.get(f, 0) + (-1) ** k
        if len(tau) > 1:
            sgn = (-1) ** (len(sigma) - 1)
            for k in range(len(tau)):
                f = self.canonical(sigma, tau[:k] + tau[k + 1:])
                out[f] = out.get(f, 0) + sgn * (-1) ** k
        return {f: c for f, c in out.items() if c}

    def chain_complex(self, cells) -> ChainComplex:
        by_dim: dict = {}
        for c in cells:
            by_dim.setdefault(len(c[0]) + len(c[1]) - 2, []).append(c)
        top = max(by_dim, default=-1)
        layers = [by_dim.get(k, []) for k in range(top + 1)]
        index = [{c: i for i, c in enumerate(layer)} for layer in layers]
        boundaries = [[{} for _ in layers[0]]] if layers else []
        for k in range(1, len(layers)):
            boundaries.append([{index[k - 1][f]: e for f, e in self.boundary(c).items()} for c in layers[k]])
        return ChainComplex([len(x) for x in layers], boundaries)

    def fixed_cells(self, generators):
        keep = self.doubled.fixed_vertices(generators)
        sigmas = [s for s in self.doubled.complex.simplices if keep.issuperset(s)]
        return self.cells(sigmas)

    def homology(self, cells) -> HomologyResult:
        return self.chain_complex(cells).homology()

    def invariant_cells_pointwise(self, generators) -> bool:
        """Every cell fixed by a generator has its first factor fixed vertex by vertex."""
        for g in generators:
            perm = self.doubled.permutation(g)
            for s in self.doubled.complex.simplices:
                img = tuple(sorted(perm.get(v, -1) for v in s))
                if img == s and any(perm[v] != v for v in s):
                    return False
        return True

    def to_text(self, cells=None) -> str:
        cells = self.cells() if cells is None else cells
        lines = [f"v {v} {lbl}" for v, lbl in sorted(self.doubled.complex.labels.items())]
        off = max(self.doubled.complex.labels, default=-1) + 1
        lines += [f"v {v + off} {lbl}" for v, lbl in sorted(self.sphere.complex.labels.items())]
        for n, (s, t) in enumerate(cells):
            lines.append(f"p {n} {','.join(map(str, s))} {','.join(str(v + off) for v in t)} +1")
        return "\n".join(lines) + "\n"


def quotient_K(doubled: DoubledAxesNerve, N: int) -> QuotientK:
    if not doubled.involution_free():
        raise RefusalError("the sheet swap has a fixed vertex")
    return QuotientK(doubled, SphereModel(N))


@dataclass
class EFBCModel:
    group: object
    evc: EVCModel
    doubled: DoubledAxesNerve
    K: QuotientK

    @property
    def N(self) -> int:
        return self.K.N

    def metadata(self) -> dict:
        return self.evc.metadata() | {
            "sphere_dim": self.N,
            "doubled_vertices": len(self.doubled.complex.vertices),
            "K_cells": len(self.doubled.complex) * len(self.K.sphere.complex) // 2,
        }


def build_EFBC(group, window_R, axes_bound=1, axes_choice: str = "enumerated", N: int = 3, policy=None, seed: int = 0, evc=None) -> EFBCModel:
    if N < 1:
        raise ValueError("sphere dimension must be at least 1")
    evc = evc or build_EVC(group, window_R, axes_bound, axes_choice, policy, seed)
    doubled = DoubledAxesNerve(evc.axes_cover, evc.axes_action)
    return EFBCModel(group, evc, doubled, quotient_K(doubled, N))


def _commutes_with_swap(doubled: DoubledAxesNerve, elements) -> bool:
    for g in elements:
        perm = doubled.permutation(g)
        for v, w in perm.items():
            if perm.get(v ^ 1) != w ^ 1:
                return False
    return True


def verify_EFBC(model: EFBCModel, battery=None, workers: int = 1) -> Verification:
    group = model.group
    battery = default_battery(group) if battery is None else battery
    efin, K = model.evc.efin, model.K
    elements = _window_elements(efin.cover)
    audit_u = efin.action.audit(efin.complex, elements)
    audit_v = model.evc.axes_action.audit(elements)
    checks = {
        "cover_good": efin.cover_report.ok,
        "equivariant": audit_u.equivariant and audit_v["equivariant"],
        "invariant_simplices_pointwise_fixed": audit_u.pointwise_fixed and audit_v["pointwise_fixed"],
        "well_behaved": model.evc.well_behaved.ok,
        "antipodal_free": K.sphere.antipodal_free(),
        "quotient_free": K.quotient_free(),
        "action_commutes_with_swap": _commutes_with_swap(model.doubled, elements),
        "K_invariant_cells_pointwise": K.invariant_cells_pointwise(elements),
        "local_finiteness_M": efin.local_finiteness,
    }

    def _row(b):
        tag = classify_family(group, b.generators)
        member = tag.member_of("fbc")
        fu = efin.complex.full_subcomplex(efin.action.fixed_vertices(b.generators))
        cells = K.fixed_cells(b.generators)
        detail = {"fixed_U": len(fu), "fixed_K_cells": len(cells)}
        if member and not fu.is_empty:
            ok, cert = collapse(fu).collapsed_to_point, "collapse"
        elif member:
            h = K.homology(cells)
            detail["fixed_K_homology"] = h.summary()
            ok = h.acyclic_through(model.N - 1)
            cert = f"acyclic-to-degree-{model.N - 1}"
        else:
            ok = fu.is_empty and not cells
            cert = "exact"
        return RowResult(b.name, b.expected, tag.tag, member, cert, ok and tag.tag == b.expected, detail)

    rows = map_rows(_row, battery, workers)
    return Verification("fbc", rows, checks)


# ---------------------------------------------------------------------------
# verification of serialized complexes


def _parse_point(text: str, space):
    if isinstance(space, ProductSpace):
        tp, t = text.rsplit("@", 1)
        kind, rest = tp[0], tp[1:]
        addr, off = rest.split(":")
        return ProductPoint(TreePoint("" if addr == "-" else addr, Fraction(off), kind == "b"), Fraction(t))
    if text.startswith(("t", "b")) and ":" in text:
        kind, rest = text[0], text[1:]
        addr, off = rest.split(":")
        return TreePoint("" if addr == "-" else addr, Fraction(off), kind == "b")
    return tuple(Fraction(x) for x in text.split(","))


def parse_ball_label(label: str, space):
    """Inverse of ``ball_label``: (center, radius squared)."""
    if not label.startswith("[") or "]r2=" not in label:
        raise ValueError(f"not a ball label: {label!r}")
    body, r2 = label[1:].rsplit("]r2=", 1)
    return _parse_point(body, space), Fraction(r2)


def read_complex(text: str):
    """Vertex labels and maximal simplices of a complex file."""
    labels, simplices = {}, []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, *rest = line.split(" ", 1)
        rest = rest[0] if rest else ""
        if tag == "v":
            vid, _, lbl = rest.partition(" ")
            labels[int(vid)] = lbl
        elif tag == "s":
            simplices.append(tuple(sorted(int(x) for x in rest.split())))
        elif tag == "p":
            continue
        else:
            raise ValueError(f"line {n}: unknown record {tag!r}")
    return labels, simplices


class LabelledBallAction:
    """Partial action on balls named by their labels."""

    def __init__(self, space, balls: dict):
        self.space = space
        self.balls = balls  # vertex -> (center, r2)
        self._index = {b: v for v, b in balls.items()}
        self._cache = {}

    def permutation(self, g) -> dict:
        hit = self._cache.get(id(g))
        if hit is not None and hit[0] is g:
            return hit[1]
        perm = {}
        for v, (c, r2) in self.balls.items():
            w = self._index.get((g(c), r2))
            if w is not None:
                perm[v] = w
        self._cache[id(g)] = (g, perm)
        return perm

    def fixed_vertices(self, generators) -> set:
        out = set(self.balls)
        for g in generators:
            perm = self.permutation(g)
            out = {v for v in out if perm.get(v) == v}
        return out


def _audit(cx: SimplicialComplex, perms) -> tuple:
    equivariant = pointwise = True
    edges = cx.simplices_of_dim(1)
    maximal = [s for s in cx.maximal_simplices() if len(s) > 1]
    for perm in perms:
        for i, j in edges:
            if perm.get(i) == j or perm.get(j) == i:
                pointwise = False
        for s in maximal:
            img = tuple(sorted(perm[v] for v in s if v in perm))
            if len(img) > 1 and img not in cx:
                equivariant = False
    return equivariant, pointwise


def verify_complex_text(text: str, group, family: str = "fin", battery=None, workers: int = 1) -> Verification:
    """Re-verify a serialized nerve (``fin``) or join (``vc``) against ``group``."""
    if family not in ("fin", "vc"):
        raise ValueError("serialized verification supports the fin and vc families")
    space = group.space
    labels, maximal = read_complex(text)
    xs = {v: l[2:] for v, l in labels.items() if l.startswith("X:")}
    ys = {v: l[2:] for v, l in labels.items() if l.startswith("Y:")}
    if family == "fin":
        xs = {v: l for v, l in labels.items()}
        ys = {}
    elif labels and not xs and not ys:
        raise ValueError("join vertices must be labelled X: or Y:")
    left = SimplicialComplex(xs)
    right_ids = sorted(ys)
    yoff = min(right_ids, default=0)
    right = SimplicialComplex({v - yoff: ys[v] for v in right_ids})
    for s in maximal:
        x = tuple(v for v in s if v in xs)
        y = tuple(v - yoff for v in s if v in ys)
        if x:
            left.add_simplex(x)
        if y:
            right.add_simplex(y)
    balls = {v: parse_ball_label(l, space) for v, l in xs.items()}
    action = LabelledBallAction(space, balls)
    reach = max((math.sqrt(float(space.distance_sq(c, space.origin()))) for c, _ in balls.values()), default=0)
    elements = group.enumerate(Fraction(math.ceil(2 * reach + 2)), space.origin())
    # axes part: labels A[direction]|[base]r2=...
    ax_balls, dirs = {}, {}
    for v, l in right.labels.items():
        head, _, ball = l.partition("|")
        dtext = head[2:-1]
        d = VERTICAL if dtext == "vertical" else tuple(Fraction(x) for x in dtext.split(","))
        dirs[v] = d
        ax_balls[v] = ball
    classes = {}
    if ax_balls:
        for d in set(dirs.values()):
            line = vertical_line(space, space.tree.root()) if d == VERTICAL else euclidean_line(space, space.origin(), d)
            classes[d] = parallel_class(space, line)
    parsed = {v: (dirs[v], *parse_ball_label(ax_balls[v], classes[dirs[v]].base_space)) for v in ax_balls}
    index = {p: v for v, p in parsed.items()}

    def axes_perm(g):
        perm = {}
        for v, (d, y, r2) in parsed.items():
            out = transport_axis(space, classes, g, d, y)
            if out is None:
                continue
            w = index.get((out[0], out[1], r2))
            if w is not None:
                perm[v] = w
        return perm

    eq_l, pw_l = _audit(left, [action.permutation(g) for g in elements])
    eq_r, pw_r = _audit(right, [axes_perm(g) for g in elements]) if ax_balls else (True, True)
    checks = {"equivariant": eq_l and eq_r, "invariant_simplices_pointwise_fixed": pw_l and pw_r, "elements_checked": len(elements)}
    battery = default_battery(group) if battery is None else battery
    jc = JoinComplex(left, right)

    def _row(b):
        tag = classify_family(group, b.generators)
        member = tag.member_of(family)
        fl = action.fixed_vertices(b.generators)
        fr = set(right.vertices)
        for g in b.generators:
            p = axes_perm(g)
            fr = {v for v in fr if p.get(v) == v}
        if family == "fin":
            fx = left.full_subcomplex(fl)
            ok = collapse(fx).collapsed_to_point if member else fx.is_empty
            detail = {"fixed_simplices": len(fx)}
        else:
            ident = fix_join_identity(jc, fl, fr)
            rhs = ident.pop("rhs_complex")
            ok = ident["holds"] and (rhs.collapsible() if member else rhs.is_empty)
            detail = {"fix_join_identity": ident}
        cert = "collapse" if member else "exact"
        return RowResult(b.name, b.expected, tag.tag, member, cert, ok and tag.tag == b.expected, detail)

    rows = map_rows(_row, battery, workers)
    return Verification(family, rows, checks)
