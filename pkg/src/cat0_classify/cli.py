"""Command line front end.

Exit status: 0 when every verification row passes, 1 on a verification
failure, 2 for invalid configuration and 3 when a construction is refused.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from .axes import axes_space, well_behaved_check
from .classifying import (
    FAMILIES,
    QuotientK,
    RefusalError,
    RowResult,
    SphereModel,
    Verification,
    build_axes_cover,
    build_EFBC,
    build_EFIN,
    build_EVC,
    classify_family,
    map_rows,
    parse_ball_label,
    read_complex,
    transport_axis,
    verify_complex_text,
    verify_EFBC,
    verify_EFIN,
    verify_EVC,
)
from .cover import build_good_cover
from .lines import VERTICAL, euclidean_line, parallel_class, vertical_line
from .report import RunConfig, build_report, dump_report, load_config
from .simplicial import SimplicialComplex, collapse
from .spaces import DomainError
from .svg import emit_svg
from .validation import AXES_CHOICES, FAMILY_NAMES, ConfigError, check_battery, check_group, check_positive_int

log = logging.getLogger("cat0_classify")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_REFUSED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cat0-classify", description="Classifying complexes for groups acting on CAT(0) model spaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--group", help="preset name (p1, p2, pm, pg, cm, pmm, p4, p3, p6, tree-odometer)")
    common.add_argument("-R", "--window", help="window radius R about the basepoint")
    common.add_argument("--axes-bound", dest="axes_bound", help="displacement bound for enumerated axes")
    common.add_argument("--depth", type=int, help="tree depth D")
    common.add_argument("--sphere-dim", dest="sphere_dim", type=int, help="sphere dimension N")
    common.add_argument("--axes-choice", dest="axes_choice", choices=AXES_CHOICES)
    common.add_argument("--battery", help="'default' or a comma separated list of row names")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    for name in ("build-efin", "build-evc", "build-efbc", "axes", "plot"):
        sub.add_parser(name, parents=[common])
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--complex", required=True, help="complex file to check")
    v.add_argument("--k-complex", dest="k_complex", help="quotient complex file (fbc family)")
    v.add_argument("--family", required=True, choices=FAMILY_NAMES)
    return p


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = cfg.with_overrides(
        group=args.group, window=args.window, axes_bound=args.axes_bound, depth=args.depth,
        sphere_dim=args.sphere_dim, axes_choice=args.axes_choice, battery=args.battery, out=args.out, seed=args.seed,
    )
    return cfg.validated()


def _workers() -> int:
    raw = os.environ.get("CAT0_CLASSIFY_THREADS", "1")
    return check_positive_int(raw, "CAT0_CLASSIFY_THREADS")


def _write(out: Path, name: str, text: str):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _finish(out: Path, report: dict) -> int:
    _write(out, "report.json", dump_report(report))
    if report["status"] == "refused":
        return EXIT_REFUSED
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _run_build(cmd, cfg, out, workers) -> int:
    group = check_group(cfg.group, cfg.depth)
    battery = check_battery(cfg.battery, group)
    try:
        if cmd == "build-efin":
            m = build_EFIN(group, cfg.window)
            ver = verify_EFIN(m, battery, workers=workers)
            _write(out, "nerve_U.cx", m.complex.to_text())
            meta = m.metadata()
        elif cmd == "build-evc":
            m = build_EVC(group, cfg.window, cfg.axes_bound, cfg.axes_choice, seed=cfg.seed)
            ver = verify_EVC(m, battery, workers=workers)
            _write(out, "nerve_U.cx", m.efin.complex.to_text())
            _write(out, "nerve_V.cx", m.axes_cover.complex.to_text())
            _write(out, "join.cx", m.join.to_text())
            meta = m.metadata()
        else:
            m = build_EFBC(group, cfg.window, cfg.axes_bound, cfg.axes_choice, cfg.sphere_dim, seed=cfg.seed)
            ver = verify_EFBC(m, battery, workers=workers)
            _write(out, "nerve_U.cx", m.evc.efin.complex.to_text())
            _write(out, "K.cx", m.K.to_text())
            meta = m.metadata() | {"K_realization": "simplicial product cells with an explicit cellular boundary"}
    except (RefusalError, DomainError) as exc:
        return _finish(out, build_report(cmd, cfg, {}, status="refused", reason=str(exc)))
    return _finish(out, build_report(cmd, cfg, meta, ver))


def _run_axes(cfg, out) -> int:
    group = check_group(cfg.group, cfg.depth)
    try:
        A = axes_space(group, cfg.axes_choice, cfg.axes_bound)
    except DomainError as exc:
        return _finish(out, build_report("axes", cfg, {}, status="refused", reason=str(exc)))
    wb = well_behaved_check(A, group, cfg.axes_bound, seed=cfg.seed)
    rows = [RowResult(k, "true", str(v).lower(), True, "at-scale" if k == "closed_at_scale" else "exact", bool(v)) for k, v in wb.as_dict().items() if isinstance(v, bool)]
    meta = {
        "classes": [",".join(str(x) for x in c.direction) if c.direction != VERTICAL else "vertical" for c in A.classes],
        "choice": A.choice,
        "well_behaved": wb.as_dict(),
    }
    return _finish(out, build_report("axes", cfg, meta, Verification("axes", rows, {})))


def _run_plot(cfg, out) -> int:
    group = check_group(cfg.group, cfg.depth)
    try:
        cover = build_good_cover(group.space, group, cfg.window)
        A = axes_space(group, cfg.axes_choice, cfg.axes_bound)
        ac = build_axes_cover(group, A, cfg.window) if A.classes else None
        svg = emit_svg(group.space, cover, ac, cfg.window)
    except (RefusalError, DomainError) as exc:
        return _finish(out, build_report("plot", cfg, {}, status="refused", reason=str(exc)))
    _write(out, "figure.svg", svg)
    meta = {"balls": len(cover), "axes_classes": len(A.classes)}
    return _finish(out, build_report("plot", cfg, meta))


def _verify_fbc(cfg, group, battery, u_text, k_text, workers) -> Verification:
    """Re-check a serialized E_FBC pair: the cover nerve and the quotient cells."""
    space = group.space
    u_labels, u_max = read_complex(u_text)
    U = SimplicialComplex(u_labels)
    for s in u_max:
        U.add_simplex(s)
    balls = {v: parse_ball_label(l, space) for v, l in u_labels.items()}
    index = {b: v for v, b in balls.items()}

    k_labels, cells = {}, []
    for raw in k_text.splitlines():
        parts = raw.split(" ")
        if parts[0] == "v":
            k_labels[int(parts[1])] = " ".join(parts[2:])
        elif parts[0] == "p":
            sig = tuple(int(x) for x in parts[2].split(","))
            tau = tuple(int(x) for x in parts[3].split(","))
            cells.append((sig, tau))
    sheet = {v: l for v, l in k_labels.items() if l.startswith("U:")}
    off = max(sheet, default=-1) + 1
    n_sphere = len(k_labels) - len(sheet)
    if n_sphere < 4 or n_sphere % 2:
        raise ConfigError("quotient file has no antipodal sphere")
    sphere = SphereModel(n_sphere // 2 - 1)
    K = QuotientK(None, sphere)
    cells = [(s, tuple(v - off for v in t)) for s, t in cells]
    paired = all(sheet.get(v ^ 1, "")[3:] == l[3:] and sheet[v ^ 1][2] != l[2] for v, l in sheet.items())
    canonical = all(K.canonical(s, t) == (s, t) for s, t in cells)

    classes, parsed = {}, {}
    for v, l in sheet.items():
        sign = 1 if l[2] == "+" else -1
        head, _, ball = l[4:].partition("|")
        dtext = head[2:-1]
        d = VERTICAL if dtext == "vertical" else tuple(Fraction(x) for x in dtext.split(","))
        if d not in classes:
            line = vertical_line(space, space.tree.root()) if d == VERTICAL else euclidean_line(space, space.origin(), d)
            classes[d] = parallel_class(space, line)
        y, r2 = parse_ball_label(ball, classes[d].base_space)
        parsed[v] = (d, y, r2, sign)
    where = {(d, y, r2, s): v for v, (d, y, r2, s) in parsed.items()}

    def sheet_perm(g):
        perm = {}
        for v, (d, y, r2, s) in parsed.items():
            img = transport_axis(space, classes, g, d, y)
            if img is not None:
                w = where.get((img[0], img[1], r2, -s if img[2] else s))
                if w is not None:
                    perm[v] = w
        return perm

    present = set(cells)
    closed = all(f in present for c in cells for f in K.boundary(c))
    checks = {"sheets_paired": paired, "cells_canonical": canonical, "cells_closed": closed, "antipodal_free": sphere.antipodal_free()}

    def _row(b):
        tag = classify_family(group, b.generators)
        member = tag.member_of("fbc")
        fu = set(U.vertices)
        fk = set(sheet)
        for g in b.generators:
            fu = {v for v in fu if index.get((g(balls[v][0]), balls[v][1])) == v}
            p = sheet_perm(g)
            fk = {v for v in fk if p.get(v) == v}
        FU = U.full_subcomplex(fu)
        fixed_cells = [c for c in cells if fk.issuperset(c[0])]
        detail = {"fixed_U": len(FU), "fixed_K_cells": len(fixed_cells)}
        if member and not FU.is_empty:
            ok, cert = collapse(FU).collapsed_to_point, "collapse"
        elif member and not closed:
            ok, cert = False, f"acyclic-to-degree-{sphere.N - 1}"
        elif member:
            h = K.homology(fixed_cells)
            detail["fixed_K_homology"] = h.summary()
            ok, cert = h.acyclic_through(sphere.N - 1), f"acyclic-to-degree-{sphere.N - 1}"
        else:
            ok, cert = FU.is_empty and not fixed_cells, "exact"
        return RowResult(b.name, b.expected, tag.tag, member, cert, ok and tag.tag == b.expected, detail)

    return Verification("fbc", map_rows(_row, battery, workers), checks)


def _run_verify(args, cfg, out, workers) -> int:
    group = check_group(cfg.group, cfg.depth)
    battery = check_battery(cfg.battery, group)
    try:
        text = Path(args.complex).read_text()
        k_text = Path(args.k_complex).read_text() if args.k_complex else None
    except OSError as exc:
        raise ConfigError(f"cannot read complex: {exc}") from None
    try:
        if args.family == "fbc":
            if k_text is None:
                raise ConfigError("the fbc family needs --k-complex")
            ver = _verify_fbc(cfg, group, battery, text, k_text, workers)
        else:
            ver = verify_complex_text(text, group, args.family, battery, workers=workers)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed complex file: {exc}") from None
    meta = {"complex": Path(args.complex).name, "family": args.family, "family_tags": sorted(FAMILIES[args.family])}
    report = build_report("verify", cfg, meta, ver)
    code = _finish(out, report)
    for name, value in report["checks"].items():
        if value is False:
            print(f"FAIL check {name}", file=sys.stderr)
    for row in report["rows"]:
        if not row["passed"]:
            why = f"tag {row['observed']}" if row["observed"] != row["expected"] else f"{row['certificate']} certificate not obtained"
            print(f"FAIL {row['name']}: expected {row['expected']}, {why}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        cfg = _config(args)
        workers = _workers()
        out = Path(cfg.out)
        log.info("running %s for %s", args.command, cfg.group)
        if args.command.startswith("build-"):
            code = _run_build(args.command, cfg, out, workers)
        elif args.command == "axes":
            code = _run_axes(cfg, out)
        elif args.command == "plot":
            code = _run_plot(cfg, out)
        else:
            code = _run_verify(args, cfg, out, workers)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if code == EXIT_OK:
        print(json.dumps({"status": "pass", "out": str(out)}))
    return code


if __name__ == "__main__":
    sys.exit(main())
