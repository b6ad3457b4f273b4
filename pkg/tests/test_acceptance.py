"""Acceptance criteria 1-10, each at its stated tolerance and time limit.

Every criterion prints one ``CRITERION n: PASS|FAIL`` line. Expensive models
are built once per module and their serialized artifacts are kept so the
determinism criterion can compare them with a second, independent run.
"""

import json
import random
import time
from fractions import Fraction

import pytest

from cat0_classify import (
    axes_space,
    build_EFBC,
    build_EFIN,
    build_EVC,
    build_good_cover,
    collapse,
    default_battery,
    flat_strip_distance,
    preset,
    verify_EFBC,
    verify_EFIN,
    verify_EVC,
    verify_good_cover,
    well_behaved_check,
)
from cat0_classify.isometries import TreeAutomorphism, apply_to_line, classify, line_action
from cat0_classify.lines import ParallelClass, euclidean_line, vertical_line
from cat0_classify.simplicial import SimplicialComplex, hollow_simplex, projective_plane
from cat0_classify.spaces import TreeSpace

GROUPS = ["p1", "p2", "pm", "pg", "pmm"]
DEPTH = 12

_efin: dict = {}
_evc: dict = {}
ARTIFACTS: dict = {}


@pytest.fixture
def announce(capsys):
    """Print one PASS/FAIL line past pytest's capture, then assert."""

    def _announce(n: int, ok: bool, detail: str = ""):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, f"criterion {n} failed: {detail}"

    return _announce


def _timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


# ---------------------------------------------------------------------------
# 1. tree metrics


def tree_metrics_artifact():
    T = TreeSpace(DEPTH)
    root = T.root()
    leaves = ["".join("1" if (r >> i) & 1 else "0" for i in range(DEPTH)) for r in range(2**DEPTH)]
    boundary_ok = all(T.distance_q(root, T.boundary(a)) == 1 for a in leaves)
    edges_ok = True
    for a in leaves[:64]:
        for n in range(1, DEPTH + 1):
            parent, child = T.node(a[: n - 1]), T.node(a[:n])
            edges_ok &= T.edge_length(n) == Fraction(1, 2**n) and T.distance_q(parent, child) == Fraction(1, 2**n)
    phi = TreeAutomorphism.odometer()
    orbits = {}
    for n in range(0, 11):
        start = "0" * n
        seen, a = {start}, phi.map_address(start)
        while a != start:
            seen.add(a)
            a = phi.map_address(a)
        orbits[n] = len(seen)
    return {"boundary_points": len(leaves), "boundary_ok": boundary_ok, "edges_ok": edges_ok, "orbits": orbits}


def test_criterion_1_tree_metrics(announce):
    art, dt = _timed(tree_metrics_artifact)
    ARTIFACTS[1] = json.dumps(art, sort_keys=True)
    ok = art["boundary_ok"] and art["edges_ok"] and all(art["orbits"][n] == 2**n for n in range(11)) and dt < 1
    announce(1, ok, f"{art['boundary_points']} boundary points at distance 1, orbits 2^n for n<=10, {dt:.2f}s")


# ---------------------------------------------------------------------------
# 2. axes closure at scale


def axes_closure_artifact():
    G = preset("tree-odometer", depth=DEPTH)
    bound = 2**DEPTH
    enum = well_behaved_check(axes_space(G, "enumerated", bound), G, bound)
    root = well_behaved_check(axes_space(G, "root", 1), G, 1)
    return {"enumerated": enum.as_dict(), "root": root.as_dict()}


def test_criterion_2_axes_closure(announce):
    art, dt = _timed(axes_closure_artifact)
    ARTIFACTS[2] = json.dumps(art, sort_keys=True)
    enum, root = art["enumerated"], art["root"]
    wit = enum["witnesses"].get("closed_at_scale", {})
    near = wit and Fraction(wit["distance"]) <= Fraction(1, 2**DEPTH)
    flags = ("closed_at_scale", "componentwise_convex", "invariant", "meets_components")
    ok = enum["closed_at_scale"] is False and near and all(root[f] for f in flags) and dt < 5
    announce(2, ok, f"enumerated witness {wit.get('non_axis_line')} at {wit.get('distance')}, root all flags true, {dt:.2f}s")


# ---------------------------------------------------------------------------
# 3-5. good cover, E_FIN, restriction maps


def efin_model(name):
    if name not in _efin:
        G = preset(name)
        t = time.perf_counter()
        cover = build_good_cover(G.space, G, 3)
        report = verify_good_cover(cover)
        t_cover = time.perf_counter() - t
        model = build_EFIN(G, 3)
        _efin[name] = (model, report, t_cover, time.perf_counter() - t)
    return _efin[name]


@pytest.mark.parametrize("name", GROUPS)
def test_criterion_3_good_cover(name, announce):
    model, report, t_cover, t_all = efin_model(name)
    M = model.local_finiteness
    ok = report.ok and report.invariant and report.good and M <= 64 and t_cover < 60 and t_all < 60
    ARTIFACTS[(3, name)] = model.complex.to_text()
    announce(3, ok, f"{name}: {len(model.cover)} balls, {report.elements_checked} elements, M={M}, {t_all:.1f}s")


@pytest.mark.parametrize("name", GROUPS)
def test_criterion_4_efin(name, announce):
    model, _, _, t_build = efin_model(name)
    ver, dt = _timed(verify_EFIN, model, default_battery(model.group))
    _efin[name] = _efin[name] + (ver,)
    ARTIFACTS[(4, name)] = json.dumps(ver.as_dict(), sort_keys=True, default=str)
    nerve_ok = collapse(model.complex).collapsed_to_point
    rows_ok = all(
        (r.certificate == "collapse" if r.in_family else r.detail["fixed_simplices"] == 0) and r.passed for r in ver.rows
    )
    ok = nerve_ok and rows_ok and ver.passed and t_build + dt < 120
    announce(4, ok, f"{name}: N(U) collapses, {len(ver.rows)} rows, {t_build + dt:.1f}s")


@pytest.mark.parametrize("name", GROUPS)
def test_criterion_5_restriction_fibres(name, announce):
    entry = _efin.get(name)
    if entry is None or len(entry) < 5:
        model = efin_model(name)[0]
        ver = verify_EFIN(model)
    else:
        ver = entry[4]
    maps = [r.detail["restriction"] for r in ver.rows if "restriction" in r.detail]
    ok = bool(maps) and all(
        m["fibers_checked"] == m["fibers_ok"] and m["simplicial"] and m["scans_agree"] and m["homology_agrees"] for m in maps
    )
    total = sum(m["fibers_checked"] for m in maps)
    announce(5, ok, f"{name}: {len(maps)} restriction maps, {total} target simplices with simplex fibres")


# ---------------------------------------------------------------------------
# 6. E_VC


EVC_ROWS = {"trivial", "cyclic-2", "cyclic-3", "cyclic-4", "mirror", "translation-Z", "glide-Z", "D_inf", "Z^2"}


def evc_run(name):
    G = preset(name)
    model = build_EVC(G, 2, 1)
    battery = [r for r in default_battery(G) if r.name in EVC_ROWS]
    return model, verify_EVC(model, battery)


@pytest.mark.parametrize("name", GROUPS)
def test_criterion_6_evc(name, announce):
    (model, ver), dt = _timed(evc_run, name)
    _evc[name] = model
    ARTIFACTS[(6, name)] = model.join.to_text() + json.dumps(ver.as_dict(), sort_keys=True, default=str)
    ok = ver.passed and dt < 300
    for r in ver.rows:
        ok &= r.detail["fix_join_identity"]["holds"]
        if r.name == "Z^2":
            ok &= not r.in_family and r.detail["fix_join_identity"]["lhs"] == 0
        else:
            ok &= r.in_family and r.certificate == "collapse"
    announce(6, ok, f"{name}: {len(model.join)} join simplices, rows {[r.name for r in ver.rows]}, {dt:.1f}s")


# ---------------------------------------------------------------------------
# 7. E_FBC


def efbc_run(name):
    evc = _evc.get(name) or build_EVC(preset(name), 2, 1)
    model = build_EFBC(evc.group, 2, evc=evc, N=3)
    return model, verify_EFBC(model)


@pytest.mark.parametrize("name,row", [("pm", "glide-Z"), ("pmm", "glide-Z"), ("pm", "D_inf"), ("pmm", "D_inf")])
def test_criterion_7_efbc(name, row, announce):
    (model, ver), dt = _timed(efbc_run, name)
    ARTIFACTS[(7, name, row)] = model.K.to_text() + json.dumps(ver.as_dict(), sort_keys=True, default=str)
    r = ver.row(row)
    gens = r and [b for b in default_battery(model.group) if b.name == row][0].generators
    free = ver.checks["antipodal_free"] and ver.checks["quotient_free"]
    if row == "glide-Z":
        h = model.K.homology(model.K.fixed_cells(gens))
        detail_ok = r.detail["fixed_K_cells"] > 0 and h.acyclic_through(2)
        desc = f"Fix_K nonempty ({r.detail['fixed_K_cells']} cells), reduced homology {h.betti}"
    else:
        detail_ok = r.detail["fixed_K_cells"] == 0
        desc = "Fix_K empty"
    ok = free and detail_ok and r.passed and dt < 300
    announce(7, ok, f"{name} {row}: {desc}, identifications free, {dt:.1f}s")


# ---------------------------------------------------------------------------
# 8. line space


def _projection_oracle(space, l1, l2):
    d = l1.direction
    w = tuple(a - b for a, b in zip(l2.anchor, l1.anchor))
    return space.inner(w, w) - space.inner(w, d) ** 2 / space.inner(d, d)


def line_space_artifact(seed=8):
    rng = random.Random(seed)
    results = {"pairs": 0, "mismatches": 0, "conjugations": 0, "conj_mismatches": 0}
    for name in ("p1", "p4", "p6"):
        G = preset(name)
        E = G.space
        for c in axes_space(G, "enumerated", 2).classes:
            pc = ParallelClass(E, c.pclass.representative)
            for _ in range(1000):
                p = E.point(*(Fraction(rng.randint(-64, 64), 8) for _ in range(2)))
                q = E.point(*(Fraction(rng.randint(-64, 64), 8) for _ in range(2)))
                l1, l2 = euclidean_line(E, p, c.direction), euclidean_line(E, q, c.direction)
                fsd = flat_strip_distance(E, l1, l2)
                base = pc.base_space.distance(pc.to_base(l1), pc.to_base(l2))
                results["pairs"] += 1
                if not (fsd == base and fsd.sq == _projection_oracle(E, l1, l2)):
                    results["mismatches"] += 1
    T = preset("tree-odometer", depth=DEPTH)
    pc = ParallelClass(T.space, vertical_line(T.space, T.space.tree.root()))
    nodes = T.space.tree.nodes(8)
    for _ in range(1000):
        l1, l2 = (vertical_line(T.space, rng.choice(nodes)) for _ in range(2))
        results["pairs"] += 1
        if flat_strip_distance(T.space, l1, l2) != pc.base_space.distance(pc.to_base(l1), pc.to_base(l2)):
            results["mismatches"] += 1
    for name in ("pm", "pg", "pmm", "p4", "p6"):
        G = preset(name)
        els = G.enumerate(3, G.space.origin())
        hyper = [g for g in els if classify(G, g).kind == "hyperbolic"]
        for _ in range(100):
            g, h = rng.choice(hyper), rng.choice(els)
            cg = classify(G, g)
            image = apply_to_line(G.space, h, cg.axis)
            act = line_action(G.space, h * g * h.inverse(), image)
            results["conjugations"] += 1
            # h . axis(g) must be an axis of hgh^-1 with the same translation length
            if act is None or act[0] != 1 or act[1] ** 2 * G.space.norm_sq(image.direction) != cg.translation_sq:
                results["conj_mismatches"] += 1
    return results


def test_criterion_8_line_space(announce):
    art = line_space_artifact()
    ARTIFACTS[8] = json.dumps(art, sort_keys=True)
    ok = art["mismatches"] == 0 and art["conj_mismatches"] == 0 and art["conjugations"] >= 500
    announce(8, ok, f"{art['pairs']} flat-strip pairs ({art['mismatches']} off), {art['conjugations']} conjugations ({art['conj_mismatches']} off)")


# ---------------------------------------------------------------------------
# 9. homology engine


def homology_artifact(seed=9):
    full = SimplicialComplex.full_simplex(4).homology()
    hollow = hollow_simplex(3).homology()
    rp2 = projective_plane().homology()
    rng = random.Random(seed)
    euler_ok = 0
    for _ in range(100):
        maximal = [tuple(rng.sample(range(9), rng.randint(1, 4))) for _ in range(rng.randint(1, 12))]
        cx = SimplicialComplex.from_maximal(maximal)
        h = cx.homology(collapse=False)
        euler_ok += cx.euler_characteristic() - 1 == sum((-1) ** k * b for k, b in enumerate(h.betti))
    return {
        "full": full.summary(),
        "hollow": hollow.summary(),
        "rp2": rp2.summary(),
        "euler_ok": euler_ok,
    }


def test_criterion_9_homology(announce):
    art = homology_artifact()
    ARTIFACTS[9] = json.dumps(art, sort_keys=True)
    full, hollow, rp2 = art["full"], art["hollow"], art["rp2"]
    ok = (
        not any(full["reduced_betti"]) and not any(full["torsion"])
        and hollow["reduced_betti"] == [0, 1]
        and rp2["torsion"][1] == [2] and not any(rp2["reduced_betti"])
        and art["euler_ok"] == 100
    )
    announce(9, ok, f"point, circle b1=1, RP2 torsion {rp2['torsion'][1]}, Euler 100/100")


# ---------------------------------------------------------------------------
# 10. determinism


def test_criterion_10_determinism(announce):
    again = {
        1: json.dumps(tree_metrics_artifact(), sort_keys=True),
        2: json.dumps(axes_closure_artifact(), sort_keys=True),
        8: json.dumps(line_space_artifact(), sort_keys=True),
        9: json.dumps(homology_artifact(), sort_keys=True),
    }
    for key in ARTIFACTS:
        if isinstance(key, tuple) and key[0] == 3:
            again[key] = build_EFIN(preset(key[1]), 3).complex.to_text()
        elif isinstance(key, tuple) and key[0] == 4:
            m = build_EFIN(preset(key[1]), 3)
            again[key] = json.dumps(verify_EFIN(m, default_battery(m.group)).as_dict(), sort_keys=True, default=str)
        elif isinstance(key, tuple) and key[0] == 6:
            model, ver = evc_run(key[1])
            again[key] = model.join.to_text() + json.dumps(ver.as_dict(), sort_keys=True, default=str)
        elif isinstance(key, tuple) and key[0] == 7:
            model, ver = efbc_run(key[1])
            again[key] = model.K.to_text() + json.dumps(ver.as_dict(), sort_keys=True, default=str)
    compared = [k for k in ARTIFACTS if k in again]
    differing = [k for k in compared if ARTIFACTS[k] != again[k]]
    ok = bool(compared) and not differing
    announce(10, ok, f"{len(compared)} artifacts byte-identical across two runs" + (f"; differing {differing}" if differing else ""))
