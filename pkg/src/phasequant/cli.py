"""Command-line front end.

Every subcommand writes its data files plus one JSON manifest
``<subcommand>.json`` into ``--out``; the manifest echoes the configuration,
lists the artifacts and records each check as name/value/tolerance/pass.
Exit status: 0 all checks passed, 1 a check failed, 2 usage or configuration
error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, fields, groupoid, io, lattice, plotting, rep, starprod
from .core import PhaseGrid, signed_area_triangle

N_MIN, N_MAX = 16, 512
HBAR_MIN, HBAR_MAX = 1e-3, 10.0


class UsageError(Exception):
    pass


def _check(name, value, tol, ok):
    return {"name": name, "value": value, "tolerance": tol, "pass": bool(ok)}


def _field(arg: str, grid: PhaseGrid):
    if arg in fields.NAMED or arg.startswith("hermite-"):
        return fields.named_field(arg, grid)
    path = Path(arg)
    if not path.exists():
        raise UsageError(f"unknown field {arg!r} (not a built-in name or an existing CSV file)")
    f = io.read_field(path)
    if f.grid != grid:
        raise UsageError(f"{arg}: grid {f.grid} does not match the configured {grid}")
    return f


def _targets(arg: str | None):
    if not arg:
        return None
    path = Path(arg)
    text = path.read_text() if path.exists() else arg
    pts = []
    for chunk in text.replace("\n", ";").split(";"):
        chunk = chunk.strip()
        if not chunk or chunk.startswith("q"):
            continue
        try:
            q, p = (float(x) for x in chunk.split(","))
        except ValueError:
            raise UsageError(f"bad target {chunk!r}; expected 'q,p'") from None
        pts.append((q, p))
    if not pts:
        raise UsageError("empty target list")
    return starprod.EvaluationSet(pts)


def _polarization(arg: str):
    if arg.startswith("real:"):
        try:
            c, d = (float(x) for x in arg[5:].split(","))
        except ValueError:
            raise UsageError(f"bad polarization {arg!r}; expected real:c,d") from None
        if c == 0 and d == 0:
            raise UsageError("real polarization needs (c, d) != (0, 0)")
        return rep.Polarization.real(c, d, name=arg)
    try:
        return rep.Polarization.preset(arg)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _profile(arg: str):
    if not arg.startswith("hermite-"):
        raise UsageError(f"profile must be hermite-k, got {arg!r}")
    try:
        k = int(arg.split("-", 1)[1])
    except ValueError:
        raise UsageError(f"bad profile {arg!r}") from None
    if k < 0:
        raise UsageError(f"bad profile {arg!r}")
    return lambda x: fields.hermite_function(x, k)


def _write_points(path, targets, values):
    pts = np.array(targets.points)
    rows = np.column_stack([pts[:, 0], pts[:, 1], values.real, values.imag])
    np.savetxt(path, rows, fmt=io.FMT, delimiter=",", header="q,p,re,im", comments="")


def cmd_star(args, grid, out):
    f, g = _field(args.f, grid), _field(args.g, grid)
    arts, results = [], {}
    if args.method == "direct":
        if args.targets is None:
            raise UsageError("--method direct requires --targets")
        t = _targets(args.targets)
        try:
            vals = starprod.moyal_direct(f, g, args.hbar, t)
        except ValueError as e:
            raise UsageError(str(e)) from None
        _write_points(out / "star.csv", t, vals)
        arts.append("star.csv")
        results["sup"] = float(np.abs(vals).max())
    else:
        if args.method == "fast":
            h = starprod.moyal_fast(f, g, args.hbar)
        else:
            h = starprod.moyal_series(f, g, args.hbar, args.order)
        io.write_field(out / "star.csv", h)
        plotting.heatmap(h.samples, grid.extent, out / "star.svg", f"{args.f} * {args.g}")
        arts += ["star.csv", "star.svg"]
        results.update(sup=h.sup(), interior_sup=h.interior_sup(args.window))
    return arts, results, []


def cmd_quantize(args, grid, out):
    f = _field(args.f, grid)
    K = groupoid.quantize(f, args.hbar)
    io.write_kernel(out / "kernel.csv", K)
    plotting.heatmap(K.samples, grid.extent * 2, out / "kernel.svg", f"Q[{args.f}]")
    back = groupoid.dequantize(K, args.hbar)
    rt = (back - f).sup() / max(f.sup(), 1e-300)
    checks = [_check("round_trip", rt, 1e-8, rt < 1e-8)]
    if args.f == "gaussian":
        ora = groupoid.gaussian_kernel_oracle(grid, args.hbar)
        err = float(np.abs(K.samples - ora).max() / np.abs(ora).max())
        checks.append(_check("gaussian_oracle", err, 1e-5, err < 1e-5))
    results = {"trivialization": K.trivialization, "m": K.m, "sup": K.sup()}
    return ["kernel.csv", "kernel.svg"], results, checks


def cmd_act(args, grid, out):
    f = _field(args.f, grid)
    pol = _polarization(args.polarization)
    psi = rep.make_polarized(pol, _profile(args.profile), args.hbar, grid)
    if args.route == "triangle":
        if args.targets is None:
            raise UsageError("--route triangle requires --targets")
        t = _targets(args.targets)
        try:
            vals = rep.act_triangle(f, psi, args.hbar, t)
        except ValueError as e:
            raise UsageError(str(e)) from None
        _write_points(out / "act.csv", t, vals)
        return ["act.csv"], {"sup": float(np.abs(vals).max())}, []
    if args.route == "kernel":
        res = rep.act_kernel(groupoid.quantize(f, args.hbar), psi, args.hbar)
    else:
        res = rep.act_polarized(f, psi, args.hbar)
    io.write_field(out / "act.csv", res.field)
    plotting.heatmap(res.samples, grid.extent, out / "act.svg", f"{args.f} acting")
    _, r = rep.polarization_residual(res, pol, args.hbar, fraction=args.window)
    checks = [_check("polarization_residual", r, 1e-4, r < 1e-4)]
    return ["act.csv", "act.svg"], {"polarization": pol.name, "residual": r}, checks


def cmd_polarize_check(args, grid, out):
    pol = _polarization(args.polarization)
    prof = _profile(args.profile)
    psi = rep.make_polarized(pol, prof, args.hbar, grid)
    residual, checks = {}, []
    for name in args.fields.split(","):
        res = rep.act_polarized(_field(name.strip(), grid), psi, args.hbar)
        _, r = rep.polarization_residual(res, pol, args.hbar, fraction=args.window)
        residual[name.strip()] = r
        checks.append(_check(f"residual[{name.strip()}]", r, 1e-4, r < 1e-4))
    report = {"polarization": pol.name, "residual": residual}
    if not args.no_ladder:
        lad = rep.ladder_check(pol, prof, args.hbar, grid, fraction=args.window)
        report["ladder-errors"] = lad.as_dict()
        checks.append(_check("ladder_derivative", lad.derivative_error, 1e-3, lad.derivative_error < 1e-3))
        checks.append(_check("ladder_multiplication", lad.multiplication_error, 1e-3,
                             lad.multiplication_error < 1e-3))
    return [], report, checks


def cmd_lattice(args, grid, out):
    rng = np.random.default_rng(args.seed)
    triples = rng.uniform(-grid.extent / 2, grid.extent / 2, size=(args.triples, 3, 2))
    m0, m1, m = triples[:, 0].T, triples[:, 1].T, triples[:, 2].T
    exact = np.exp(1j / args.hbar * signed_area_triangle(m, m1, m0))
    T = lattice.triangulate_disk(args.refinement)
    try:
        if args.integration == "quadrature":
            K = np.array([lattice.kernel_quadrature(T, a, b, c, args.hbar, args.boundary)
                          for a, b, c in zip(triples[:, 0], triples[:, 1], triples[:, 2])])
        else:
            K = lattice.kernel_fresnel(T, m0, m1, m, args.hbar, args.boundary)
    except lattice.DegenerateFresnelError as e:
        raise UsageError(f"degenerate Fresnel integral: {e}") from None
    base = lattice.kernel_fresnel(lattice.triangulate_disk(0), m0, m1, m, args.hbar)
    delta = float(np.abs(K - base).max())
    dev = float(np.abs(K - exact).max())
    results = {
        "refinement": args.refinement,
        "V": T.n_vertices, "E": len(T.edges), "F": len(T.triangles),
        "triples": triples,
        "kernel_phase": np.angle(K),
        "refinement_invariance_delta": delta,
        "deviation_from_area_kernel": dev,
    }
    checks = [_check("refinement_invariance", delta, 1e-6, delta < 1e-6),
              _check("area_kernel", dev, 1e-8, dev < 1e-8)]
    return [], results, checks


def cmd_hbar_scan(args, grid, out):
    f, g = _field(args.f, grid), _field(args.g, grid)
    try:
        hbars = [float(x) for x in args.hbars.split(",")]
    except ValueError:
        raise UsageError(f"bad hbar list {args.hbars!r}") from None
    for h in hbars:
        _check_hbar_range(h)
    try:
        scan = starprod.hbar_scan(f, g, hbars, args.order, interior=args.window)
    except ValueError as e:
        raise UsageError(str(e)) from None
    rows = np.column_stack([scan.hbars, scan.errors])
    np.savetxt(out / "hbar_scan.csv", rows, fmt=io.FMT, delimiter=",", header="hbar,error",
               comments="")
    plotting.scan_plot(scan, out / "hbar_scan.svg", f"{args.f} * {args.g}")
    need = args.order + 1 - 0.3
    local = np.diff(np.log(scan.errors)) / np.diff(np.log(scan.hbars))
    results = {"order": scan.order, "slope": scan.slope, "rows": scan.rows(),
               "local_slopes": local}
    checks = [_check("slope", scan.slope, need, scan.slope >= need)]
    return ["hbar_scan.csv", "hbar_scan.svg"], results, checks


COMMANDS = {
    "star": cmd_star,
    "quantize": cmd_quantize,
    "act": cmd_act,
    "polarize-check": cmd_polarize_check,
    "lattice": cmd_lattice,
    "hbar-scan": cmd_hbar_scan,
}


def _check_hbar_range(h):
    if not (HBAR_MIN <= h <= HBAR_MAX):
        raise UsageError(f"hbar {h} outside [{HBAR_MIN}, {HBAR_MAX}]")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid-n", type=int, default=128, help="grid points per axis (even, 16..512)")
    common.add_argument("--extent", type=float, default=8.0, help="half-width L of the square grid")
    common.add_argument("--hbar", type=float, default=0.5)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--window", type=float, default=0.5,
                        help="interior fraction of the grid used for error norms")
    common.add_argument("--config", help="key=value file; its entries override flags")

    ap = argparse.ArgumentParser(prog="phasequant", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("star", parents=[common], help="star product of two fields")
    p.add_argument("--f", default="gaussian")
    p.add_argument("--g", default="gaussian")
    p.add_argument("--method", choices=["fast", "direct", "series"], default="fast")
    p.add_argument("--order", type=int, default=2, help="series truncation order")
    p.add_argument("--targets", help="'q,p;q,p;...' or a file of q,p lines")

    p = sub.add_parser("quantize", parents=[common], help="pair-groupoid kernel of a field")
    p.add_argument("--f", default="gaussian")

    p = sub.add_parser("act", parents=[common], help="act with a field on a polarized section")
    p.add_argument("--f", default="gaussian")
    p.add_argument("--polarization", default="position", help="position, momentum, bargmann or real:c,d")
    p.add_argument("--profile", default="hermite-0")
    p.add_argument("--route", choices=["kernel", "polarized", "triangle"], default="polarized")
    p.add_argument("--targets")

    p = sub.add_parser("polarize-check", parents=[common], help="polarization preservation and ladder report")
    p.add_argument("--polarization", default="position")
    p.add_argument("--profile", default="hermite-0")
    p.add_argument("--fields", default="gaussian,hermite-2,coordinate-q-windowed,coordinate-p-windowed")
    p.add_argument("--no-ladder", action="store_true")

    p = sub.add_parser("lattice", parents=[common], help="lattice kernel against the area kernel")
    p.add_argument("--refinement", type=int, default=1)
    p.add_argument("--triples", type=int, default=20)
    p.add_argument("--boundary", choices=["geodesic", "free"], default="geodesic")
    p.add_argument("--integration", choices=["fresnel", "quadrature"], default="fresnel")

    p = sub.add_parser("hbar-scan", parents=[common], help="series truncation error against hbar")
    p.add_argument("--f", default="gaussian")
    p.add_argument("--g", default="gaussian")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--hbars", default="0.2,0.1,0.05,0.025")
    return ap


def _apply_config(args, parser: argparse.ArgumentParser):
    path = Path(args.config)
    if not path.exists():
        raise UsageError(f"config file {path} not found")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        dest = key.replace("-", "_")
        if dest not in actions or dest in ("help", "config"):
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        act = actions[dest]
        if isinstance(act, argparse._StoreTrueAction):
            val = value.lower() in ("1", "true", "yes")
        else:
            try:
                val = act.type(value) if act.type else value
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
            if act.choices and val not in act.choices:
                raise UsageError(f"{path}:{lineno}: {key} must be one of {act.choices}")
        setattr(args, dest, val)


def _validate(args):
    if args.grid_n % 2 or not (N_MIN <= args.grid_n <= N_MAX):
        raise UsageError(f"--grid-n must be even and in [{N_MIN}, {N_MAX}], got {args.grid_n}")
    if not (np.isfinite(args.extent) and args.extent > 0):
        raise UsageError(f"--extent must be positive, got {args.extent}")
    _check_hbar_range(args.hbar)
    if not (0 < args.window <= 1):
        raise UsageError(f"--window must be in (0, 1], got {args.window}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.config:
            _apply_config(args, parser)
        _validate(args)
        grid = PhaseGrid(args.extent, args.grid_n)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        artifacts, results, checks = COMMANDS[args.command](args, grid, out)
    except UsageError as e:
        print(f"phasequant {args.command}: error: {e}", file=sys.stderr)
        return 2
    config = {k: v for k, v in sorted(vars(args).items()) if k != "config"}
    manifest = {
        "subcommand": args.command,
        "version": __version__,
        "config": config,
        "artifacts": artifacts,
        "results": results,
        "checks": checks,
    }
    io.write_json(out / f"{args.command}.json", manifest)
    failed = [c["name"] for c in checks if not c["pass"]]
    for c in checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}: {c['value']:.3g} (tol {c['tolerance']:g})")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
