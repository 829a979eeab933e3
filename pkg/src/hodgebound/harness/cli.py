"""Command line entry point: ``hodgebound <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .. import bounds as B
from .. import dec
from ..geometry import hypothesis_order, measure, power_diagram
from .config import domain_from_section, load_config
from .report import markdown_table, read_csv, write_csv
from .run import _family_domain, first_positive, mesh_spec, run, verify_inequalities


def _domain_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--outer", help='outer body, e.g. "ball 0 0 1" or "box 0 0 1 1"')
    ap.add_argument("--holes", default="", help='holes "cx cy r; ..."')
    ap.add_argument("--family", choices=["aeps", "dumbbell", "multi_hole_aeps", "aeps_limit"])
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--p", type=int, default=0, help="family index or form degree")
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--h", type=float, default=0.1)


def _mesh_from(args):
    if args.family:
        dom = _family_domain({"family": args.family, "n": args.n, "p": args.p, "eps": args.eps})
        return dom.mesh(args.h), dom
    if not args.outer:
        raise SystemExit("need --outer or --family")
    spec = domain_from_section({"outer": args.outer, "holes": args.holes})
    return mesh_spec(spec, args.h), spec


def cmd_mesh(args) -> int:
    mesh, _ = _mesh_from(args)
    print(f"dimension      {mesh.n}")
    for k in range(mesh.n + 1):
        print(f"{k}-simplices    {mesh.num(k)}")
    print(f"max edge       {mesh.h:.4g}")
    print(f"min angle      {mesh.min_angle():.2f}")
    print(f"volume         {mesh.volume:.6g}")
    print(f"euler          {mesh.euler_characteristic()}")
    print(f"betti          {' '.join(map(str, dec.betti_numbers(mesh)))}")
    if args.save:
        np.savez(args.save, vertices=mesh.vertices, cells=mesh.cells)
    return 0


def cmd_spectrum(args) -> int:
    mesh, _ = _mesh_from(args)
    res = first_positive(mesh, args.degree, args.k)
    for i, (lam, r) in enumerate(zip(res.eigenvalues, res.residuals), start=1):
        print(f"{i:3d}  {lam:.10g}  residual {r:.2e}")
    if args.csv:
        res.to_csv(args.csv)
    return 0


def cmd_bounds(args) -> int:
    if not args.outer:
        raise SystemExit("bounds needs an explicit --outer / --holes domain")
    spec = domain_from_section({"outer": args.outer, "holes": args.holes})
    g = measure(spec)
    n, p = spec.n, max(1, args.p)
    reports = list(B.convex_and_fk_factors(g.D))
    if spec.num_holes == 1:
        reports.insert(0, B.annulus_factor(n, p, g.D, g.Rc, g.Rh_min))
    part = power_diagram(spec)
    reports.extend(B.multi_hole_factors(n, p, g.D, g.RP, g.Rh_min, g.Rh_max, spec.num_holes, part.k(p)))
    print(f"D = {g.D:.6g}  Rc = {g.Rc:.6g}  RP = {g.RP:.6g}  Rh in [{g.Rh_min:.6g}, {g.Rh_max:.6g}]")
    print(B.report_table(reports))
    if args.csv:
        write_csv([r.row() for r in reports], args.csv)
    return 0


def cmd_partition(args) -> int:
    if not args.outer:
        raise SystemExit("partition needs --outer / --holes")
    spec = domain_from_section({"outer": args.outer, "holes": args.holes})
    part = power_diagram(spec, margin=args.margin)
    rows = [
        {"cell": i, "volume": c.volume, "exact": c.volume_exact, "empty": c.empty}
        for i, c in enumerate(part.cells)
    ]
    print(markdown_table(rows))
    print(f"intersections: {part.intersection_counts}")
    hyp = hypothesis_order(part)
    print(f"nested convex order: {'yes ' + str(hyp.order) if hyp.satisfied else 'no'}")
    return 0


def cmd_sweep(args) -> int:
    status = 0
    for path in args.configs:
        cfg = load_config(path)
        if args.workers:
            cfg.workers = args.workers
        res = run(cfg, args.out)
        print(f"{res.id}: {len(res.rows)} rows, {res.runtime:.1f} s")
        for name, (s, e) in res.slopes.items():
            print(f"  slope {name}: {s:.4f} +/- {e:.4f}")
        for c in res.checks:
            print(f"  {'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
        status |= 0 if res.passed else 1
    return status


def cmd_verify(args) -> int:
    rows = read_csv(args.rows)
    checks = verify_inequalities([r for r in rows if r.get("bound") not in (None, "")])
    w = csv.writer(sys.stdout)
    w.writerow(["row", "status", "detail"])
    for c in checks:
        w.writerow([c.name, "PASS" if c.passed else "FAIL", c.detail])
    return 0 if all(c.passed for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hodgebound", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mesh", help="generate a mesh and print its statistics")
    _domain_args(s)
    s.add_argument("--save", help="write vertices and cells to an .npz file")
    s.set_defaults(func=cmd_mesh)

    s = sub.add_parser("spectrum", help="smallest positive eigenvalues of one instance")
    _domain_args(s)
    s.add_argument("--degree", type=int, default=0, help="pencil degree (0 gives the exact 1-spectrum)")
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("bounds", help="evaluate bound factors for a domain")
    _domain_args(s)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("partition", help="power diagram and nested-convexity check")
    _domain_args(s)
    s.add_argument("--margin", type=float)
    s.set_defaults(func=cmd_partition)

    s = sub.add_parser("sweep", help="run experiment config files")
    s.add_argument("configs", nargs="+")
    s.add_argument("--out", default="runs")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("verify", help="computed >= bound table for a rows.csv")
    s.add_argument("rows")
    s.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
