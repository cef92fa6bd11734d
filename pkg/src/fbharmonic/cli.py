"""Command-line front end.

    fbharmonic verify-curve cf1 --C3 4 --span -5:5:801
    fbharmonic verify-surface cone --circular --alpha 0.5
    fbharmonic verify-submersion sol --f "exp(sqrt2*z)+exp(-sqrt2*z)"
    fbharmonic solve-ode sphere-weight --interval 0.3:1.2:181 --out f.csv
    fbharmonic catalog

Exit codes: 0 pass (including certified nonexistence), 1 verdict failure,
2 usage or configuration error.
"""

import argparse
import csv
import math
import sys

import numpy as np

from . import curves as cv
from . import submersions as sb
from . import surfaces as sf
from .errors import FBHError
from .expr import Expression
from .numcore import Grid1D, SampledFunction, diff_array, interior_slice
from .report import FAIL, PASS, ResidualReport

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
OK_STATUSES = (PASS, sf.IMPOSSIBLE, sf.MINIMAL)


class UsageError(FBHError):
    pass


def _grid_arg(text):
    try:
        return Grid1D.parse(text)
    except FBHError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grids_arg(text):
    return tuple(_grid_arg(t) for t in text.split(","))


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = (t.strip() for t in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


# --- curves ------------------------------------------------------------------

CURVES = ("cf1", "cf2", "planar", "helix", "spherical", "hyperbolic")


def build_curve(args):
    name = args.name
    span = args.span
    if name.endswith(".csv"):
        return load_curve_csv(name, args.chart)
    C4 = args.C4 if args.C4 is not None else (1.0 if name == "spherical" else 0.0)
    if name == "cf1":
        return cv.build_planar_curve(args.C3, 0.0, span or (-5, 5), 801)
    if name == "cf2":
        return cv.build_helix(math.pi / 4, args.C3, 0.0, span or (-5, 5), 801)
    if name == "planar":
        return cv.build_planar_curve(args.C3, C4, span or (-5, 5), 801)
    if name == "helix":
        return cv.build_helix(args.omega, args.C3, C4, span or (-5, 5), 801)
    if name == "spherical":
        return cv.build_spherical_curve(C4, args.C5, args.rho0,
                                        args.drho0, span or (-1.5, 1.5), 801)
    if name == "hyperbolic":
        return cv.build_hyperbolic_curve(args.C1, args.C2, args.u0, args.du0, span or (-1, 1), 801)
    raise UsageError(f"unknown curve {name!r}; choose from {', '.join(CURVES)} or a .csv file")


def load_curve_csv(path, chart=None):
    """Curve from a CSV with columns ``s, x1, ..., xn`` (further columns ignored)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    cols = [i for i, h in enumerate(header) if h.startswith("x")]
    if header[0] != "s" or not cols:
        raise UsageError("curve CSV needs columns s, x1, ..., xn")
    s = data[:, 0]
    grid = Grid1D(float(s[0]), float(s[-1]), len(s))
    if np.max(np.abs(s - grid.nodes)) > 1e-9 * max(1.0, abs(s[-1])):
        raise UsageError("curve CSV must be sampled on a uniform s-grid")
    chart = chart or f"euclidean{len(cols)}"
    return cv.SampledCurve(chart, grid, data[:, cols], [f"loaded from {path}"])


def curve_weight(text, c1=1.0):
    if text is None or text == "kappa":
        return cv.ScalarWeight.from_kappa(c1)
    if text.startswith("const:"):
        return cv.ScalarWeight.constant(float(text[6:]))
    ex = Expression(text, ("s",))
    return cv.ScalarWeight.from_callable(lambda s: ex(s=s))


def cmd_verify_curve(args):
    curve = build_curve(args)
    fd = cv.frenet(curve)
    weight = curve_weight(args.f, args.c1)
    rep = cv.fbh_curve_residual(curve, weight, args.tol or 1e-6, fd=fd)
    print(rep.format())
    print(f"  unit-speed error           {curve.speed_error():12.4e}")
    if args.out:
        cv.export_curve_csv(args.out, curve, fd, weight)
    return rep


# --- surfaces ----------------------------------------------------------------

def _cylinder_defaults(K):
    if K == 0:
        return Grid1D(-3, 3, 481), Grid1D(0.1, 3, 117)
    if K > 0:
        return Grid1D(-1.5, 1.5, 481), Grid1D(-1, 1, 81)
    return Grid1D(-1, 1, 161), Grid1D(0.1, 2, 77)


def surface_reports(args):
    """Primary report plus optional secondary (cross-check) report."""
    name, tol = args.name, args.tol or 1e-6
    grids = args.grid
    if name == "cylinder":
        if args.circle:
            sg, vg = grids or (Grid1D(0, 2 * math.pi * args.radius, 241), Grid1D(-1, 1, 81))
            cyl = sf.Cylinder.from_curvature(lambda s: 0 * s + 1 / args.radius, sg)
            ex = Expression(args.f or "exp(v)+exp(-v)", ("s", "v"))
            f = (lambda S, V: ex(s=S, v=V))
        else:
            K = args.K
            sg, vg = grids or _cylinder_defaults(K)
            C4 = args.C4 if args.C4 is not None else (1.0 if K > 0 else 0.0)
            cp = cv.ChiParams(K, 0.0, args.C1, args.C2, args.C3, C4, args.C5)
            pp = sf.PsiParams(K, args.d1, args.d2, args.d3, args.d4, args.d5, args.d6)
            cyl, f = sf.build_fbh_cylinder(cp, pp, sg, vg)
            if args.f:
                ex = Expression(args.f, ("s", "v"))
                f = (lambda S, V: ex(s=S, v=V))
        rep = sf.fbh_hypersurface_residual(cyl, f, vg, tol)
        return rep, sf.cylinder_cross_residual(cyl, f, vg, tol)
    if name == "cone":
        if not args.circular:
            raise UsageError("only the circular cone (--circular) is built in")
        sg, vg = grids or (None, None)
        return sf.cone_probe(sf.Cone.circular(args.alpha, sg), vg, tol), None
    if name == "tangent":
        sg, vg = grids or (None, None)
        if args.edge == "helix":
            ts = sf.TangentSurface.helix(args.a, args.b, sg)
        elif args.edge == "planar":
            ts = sf.TangentSurface.planar(args.radius, sg)
        else:
            raise UsageError("--edge must be helix or planar")
        return sf.tangent_probe(ts, vg, tol), None
    raise UsageError(f"unknown surface {name!r}; choose from cylinder, cone, tangent")


def cmd_verify_surface(args):
    if args.grid is not None and len(args.grid) != 2:
        raise UsageError("--grid needs s0:s1:ns,v0:v1:nv")
    rep, cross = surface_reports(args)
    print(rep.format())
    if cross is not None:
        print(cross.format())
        if cross.verdict != rep.verdict:
            rep.flags.append("cross formulation disagrees")
            rep.status = FAIL
    if args.out:
        sf.export_surface_csv(args.out, rep)
    return rep


# --- submersions -------------------------------------------------------------

def submersion_report(name, f_text, grids, tol, f0=1.0, df0=0.0):
    model = sb.get_model(name)
    grids = grids or model.default_grid
    if len(grids) != 3:
        raise UsageError("--grid needs three axes a:b:n,a:b:n,a:b:n")
    sb.check_grid_margin(model, grids)
    if f_text is None and model.default_f is None:
        f = sb.solve_sphere_f((grids[0].start, grids[0].end), f0, df0, grids[0].count)
        grids = (f.grid,) + tuple(grids[1:])
    else:
        f = f_text if f_text is not None else model.default_f
    return sb.fbh_submersion_residual(model, f, grids, tol)


def cmd_verify_submersion(args):
    rep = submersion_report(args.name, args.f, args.grid, args.tol or 1e-6, args.f0, args.df0)
    print(rep.format())
    tag = f", proper (|tau2|={rep.extra['sup|bitension|']:.6g})" if rep.extra["proper"] else ""
    print(f"result: {rep.status}{tag}")
    if args.out:
        sb.export_submersion_csv(args.out, rep)
    return rep


# --- ODEs --------------------------------------------------------------------

def cmd_solve_ode(args):
    tol = args.tol or 1e-6
    if args.name == "sphere-weight":
        g = args.interval or Grid1D(0.3, 1.2, 181)
        f = sb.solve_sphere_f((g.start, g.end), args.f0, args.df0, g.count)
        r = sb.sphere_equation_residual(f)
        rep = ResidualReport("sphere weight equation", {"f''+...": r}, tol,
                             grid=f"{f.grid.start:g}:{f.grid.end:g}:{f.grid.count}",
                             flags=list(f.flags),
                             extra={"min f": float(np.min(f.values))})
        cols = {"rho": f.grid.nodes_as(f.values.dtype.type), "f": f.values,
                "df": diff_array(f.values, f.grid.h, 1)}
    elif args.name in ("planar", "helix", "spherical", "hyperbolic"):
        args.f = None
        curve = build_curve(args)
        fd = cv.frenet(curve)
        ode = cv.verify_curvature_ode(SampledFunction(curve.grid, fd.kappa(1)),
                                      1.0 + (1 / math.tan(args.omega)) ** 2 if args.name == "helix" else 1.0,
                                      curve.chart.curvature, tol)
        rep = ode
        rep.extra["unit-speed error"] = curve.speed_error()
        cols = {"s": curve.s}
        cols.update({f"x{i + 1}": curve.points[:, i] for i in range(curve.chart.dim)})
        cols["kappa1"] = fd.kappa(1)
    else:
        raise UsageError("solve-ode target must be sphere-weight, planar, helix, spherical "
                         "or hyperbolic")
    print(rep.format())
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(cols))
            for row in zip(*(np.asarray(c, dtype=float) for c in cols.values())):
                w.writerow([f"{v:.17g}" for v in row])
    return rep


# --- catalog -----------------------------------------------------------------

def _chi_family(tol, eps):
    rng = np.random.default_rng(7)
    worst = 0.0
    for i in range(30):
        C = (-1.0, 0.0, 1.0)[i % 3] * rng.uniform(0.5, 2)
        c3 = rng.uniform(-1, 1)
        C1, C2 = rng.uniform(0.5, 2, size=2)
        if C < 0:  # keep 4 C1 C2 + A/C > 0
            C2 = max(C2, 1.5 * (1 + c3 ** 2) / (4 * C1 * -C))
        p = cv.ChiParams(C, c3, C1=C1, C2=C2, C3=rng.uniform(1, 5), C4=rng.uniform(-1, 1),
                         C5=rng.uniform(-1, 1))
        g = Grid1D(-1, 1, 801)
        y = cv.chi(g.nodes_as(np.longdouble), p) * (1 + eps)
        worst = max(worst, cv.verify_curvature_ode(SampledFunction(g, y), p.A, C, tol).max_residual)
    return ResidualReport("chi family (30 random)", {"curvature ODE": worst}, tol)


def _curve_row(build, tol, eps):
    curve = build()
    fd = cv.frenet(curve)
    weight = cv.ScalarWeight.from_kappa()
    if eps:
        k = fd.kappa(1) * (1 + eps * curve.s)
        weight = cv.ScalarWeight.sampled(SampledFunction(curve.grid, k ** -1.5))
    return cv.fbh_curve_residual(curve, weight, tol, fd=fd)


def _cylinder_row(K, tol, eps, **kw):
    sg, vg = _cylinder_defaults(K)
    cp = cv.ChiParams(K, 0.0, **kw)
    cyl, f = sf.build_fbh_cylinder(cp, sf.PsiParams(K), sg, vg)
    if eps:
        bad = cv.ChiParams(K, 0.0, **{**kw, "C3": kw.get("C3", 4.0) * (1 + eps)})
        f0 = f
        f = (lambda S, V: f0(S, V) * (cv.chi(S, cp) / cv.chi(S, bad)) ** 1.5)
    rep = sf.fbh_hypersurface_residual(cyl, f, vg, tol)
    cross = sf.cylinder_cross_residual(cyl, f, vg, tol)
    rep.extra["cross-formulation max"] = cross.max_residual
    if cross.verdict != rep.verdict:
        rep.status = FAIL
    return rep


def _circular_cylinder(tol, eps):
    sg, vg = Grid1D(0, 2 * math.pi, 241), Grid1D(-1, 1, 81)
    cyl = sf.Cylinder.from_curvature(lambda s: 0 * s + 1.0, sg)
    rep = sf.fbh_hypersurface_residual(cyl, lambda S, V: np.exp(V) + np.exp(-V)
                                       + eps * np.exp(2 * V), vg, tol)
    return rep


def _submersion_row(name, tol, eps):
    model = sb.get_model(name)
    if model.default_f is None:
        f = sb.solve_sphere_f()
        grids = (f.grid,) + model.default_grid[1:]
        if eps:
            f = SampledFunction(f.grid, f.values * (1 + eps * f.grid.nodes_as(np.longdouble)))
        return sb.fbh_submersion_residual(model, f, grids, tol)
    ex = Expression(model.default_f, model.chart.coords)
    return sb.fbh_submersion_residual(
        model, lambda *X: ex(**dict(zip(model.chart.coords, X))) * (1 + eps * X[0] ** 2), None, tol)


CATALOG_ROWS = [
    ("chi-family", PASS, 1e-6, _chi_family),
    ("cf1", PASS, 1e-6, lambda t, e: _curve_row(lambda: cv.build_planar_curve(4.0), t, e)),
    ("cf2-helix", PASS, 1e-6, lambda t, e: _curve_row(lambda: cv.build_helix(), t, e)),
    ("planar-numeric", PASS, 1e-6, lambda t, e: _curve_row(
        lambda: cv.build_planar_curve(3.0, 0.7), t, e)),
    ("helix-numeric", PASS, 1e-6, lambda t, e: _curve_row(
        lambda: cv.build_helix(0.6, 3.0, 0.5), t, e)),
    ("spherical", PASS, 1e-5, lambda t, e: _curve_row(cv.build_spherical_curve, t, e)),
    ("hyperbolic", PASS, 1e-5, lambda t, e: _curve_row(cv.build_hyperbolic_curve, t, e)),
    ("cylinder-circular", PASS, 1e-6, _circular_cylinder),
    ("cylinder-K0", PASS, 1e-6, lambda t, e: _cylinder_row(0.0, t, e, C3=4.0)),
    ("cylinder-K1", PASS, 1e-5, lambda t, e: _cylinder_row(1.0, t, e, C4=1.0)),
    ("cylinder-K-1", PASS, 1e-5, lambda t, e: _cylinder_row(-1.0, t, e, C1=1.0, C2=1.0)),
    ("cone-circular", sf.IMPOSSIBLE, 1e-6,
     lambda t, e: sf.cone_probe(sf.Cone.circular(0.5 * (1 - e) if e else 0.5), None, t)),
    ("tangent-helix", sf.IMPOSSIBLE, 1e-6,
     lambda t, e: sf.tangent_probe(sf.TangentSurface.helix(1.0, 1.0), None, t)),
    ("submersion-sol", PASS, 1e-6, lambda t, e: _submersion_row("sol", t, e)),
    ("submersion-flatcyl", PASS, 1e-6, lambda t, e: _submersion_row("flatcyl", t, e)),
    ("submersion-h3", PASS, 1e-6, lambda t, e: _submersion_row("h3", t, e)),
    ("submersion-s3", PASS, 1e-5, lambda t, e: _submersion_row("s3", t, e)),
]


def run_catalog(tol=None, perturb=(), eps=1e-2):
    """Run every catalog row; returns a list of (name, expected, status, max residual)."""
    rows = []
    for name, expected, row_tol, fn in CATALOG_ROWS:
        try:
            rep = fn(tol or row_tol, eps if name in perturb else 0.0)
            if rep.extra.get("proper") is False and rep.status == PASS:
                rep.status = FAIL
            status, worst = rep.status, rep.max_residual
        except FBHError as exc:
            status, worst = f"ERROR: {exc}", float("nan")
        rows.append((name, expected, status, worst))
    return rows


def cmd_catalog(args):
    unknown = set(args.perturb) - {r[0] for r in CATALOG_ROWS}
    if unknown:
        raise UsageError(f"unknown catalog rows: {', '.join(sorted(unknown))}")
    rows = run_catalog(args.tol, args.perturb)
    print(f"{'row':<22s} {'expected':<11s} {'status':<11s} {'max residual':>13s}")
    for name, expected, status, worst in rows:
        print(f"{name:<22s} {expected:<11s} {status:<11s} {worst:13.4e}")
    counts = {s: sum(r[2] == s for r in rows) for s in (PASS, sf.IMPOSSIBLE, FAIL)}
    print(f"summary: {counts[PASS]} PASS, {counts[sf.IMPOSSIBLE]} IMPOSSIBLE, "
          f"{len(rows) - counts[PASS] - counts[sf.IMPOSSIBLE]} other")
    ok = all(r[1] == r[2] for r in rows)
    return ResidualReport("catalog", {}, 1.0, status=PASS if ok else FAIL)


# --- parser ------------------------------------------------------------------

def _common(p):
    p.add_argument("--tol", type=_positive, default=None, help="verdict tolerance")
    p.add_argument("--out", default=None, help="CSV output path")
    p.add_argument("--config", default=None, help="key=value config file (flags override)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a single setting")


def _curve_params(p):
    for k, d in (("C1", 1.0), ("C2", 1.0), ("C3", 4.0), ("C4", None), ("C5", 0.0)):
        p.add_argument(f"--{k}", type=float, default=d)
    p.add_argument("--omega", type=float, default=math.pi / 4)
    p.add_argument("--c1", type=float, default=1.0, help="weight constant in c1*kappa^(-3/2)")
    p.add_argument("--rho0", type=float, default=-0.5)
    p.add_argument("--drho0", type=float, default=0.5)
    p.add_argument("--u0", type=float, default=0.0)
    p.add_argument("--du0", type=float, default=0.0)
    p.add_argument("--span", type=_grid_arg, default=None, help="a:b:n")
    p.add_argument("--chart", default=None, help="chart of a CSV curve")


def build_parser():
    parser = argparse.ArgumentParser(prog="fbharmonic",
                                     description="Verify f-biharmonic curves, surfaces and submersions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-curve", help="residuals of a curve family or CSV curve")
    p.add_argument("name")
    _curve_params(p)
    p.add_argument("--f", default=None, help="kappa (default), const:VALUE or an expression in s")
    _common(p)
    p.set_defaults(func=cmd_verify_curve)

    p = sub.add_parser("verify-surface", help="cylinder residuals or cone/tangent probes")
    p.add_argument("name")
    p.add_argument("--K", type=float, default=0.0)
    for k, d in (("C1", 1.0), ("C2", 1.0), ("C3", 4.0), ("C4", None), ("C5", 0.0)):
        p.add_argument(f"--{k}", type=float, default=d)
    for i in range(1, 7):
        p.add_argument(f"--d{i}", type=float, default=1.0)
    p.add_argument("--circle", action="store_true", help="circular cylinder of --radius")
    p.add_argument("--circular", action="store_true", help="circular cone")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--edge", default="helix")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--grid", type=_grids_arg, default=None, help="s0:s1:ns,v0:v1:nv")
    p.add_argument("--f", default=None, help="weight expression in s, v")
    _common(p)
    p.set_defaults(func=cmd_verify_surface)

    p = sub.add_parser("verify-submersion", help="residuals of a catalog submersion")
    p.add_argument("name", choices=sorted(sb.CATALOG))
    p.add_argument("--f", default=None, help="weight expression in the chart coordinates")
    p.add_argument("--grid", type=_grids_arg, default=None, help="a:b:n,a:b:n,a:b:n")
    p.add_argument("--f0", type=float, default=1.0)
    p.add_argument("--df0", type=float, default=0.0)
    _common(p)
    p.set_defaults(func=cmd_verify_submersion)

    p = sub.add_parser("solve-ode", help="integrate a profile or weight equation")
    p.add_argument("name")
    _curve_params(p)
    p.add_argument("--interval", type=_grid_arg, default=None, help="rho0:rho1:n")
    p.add_argument("--f0", type=float, default=1.0)
    p.add_argument("--df0", type=float, default=0.0)
    _common(p)
    p.set_defaults(func=cmd_solve_ode)

    p = sub.add_parser("catalog", help="run every built-in example")
    p.add_argument("--perturb", action="append", default=[], metavar="ROW",
                   help="negative control: perturb the named row")
    _common(p)
    p.set_defaults(func=cmd_catalog)
    return parser


def _apply_settings(parser, args, argv):
    """Merge config file and --set values; explicit flags keep priority."""
    settings = read_config(args.config) if args.config else {}
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        settings[k.strip().replace("-", "_")] = v.strip()
    if not settings:
        return args
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions}
    explicit = {a.dest for a in subparser._actions for opt in a.option_strings
                if any(t == opt or t.startswith(opt + "=") for t in argv)}
    for k, v in settings.items():
        if k not in actions or k in ("config", "set", "help", "func"):
            raise UsageError(f"unknown setting {k!r}")
        if k in explicit and k not in {i.split("=", 1)[0].strip() for i in args.set}:
            continue
        a = actions[k]
        if isinstance(a, argparse._StoreTrueAction):
            val = v.lower() in ("1", "true", "yes", "on")
        elif isinstance(a, argparse._AppendAction):
            val = [t.strip() for t in v.split(",") if t.strip()]
        else:
            try:
                val = a.type(v) if a.type else v
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"bad value for {k}: {exc}") from None
        setattr(args, k, val)
    return args


GRID_FLAGS = ("--span", "--grid", "--interval")


def _join_grid_flags(argv):
    """``--span -5:5:801`` -> ``--span=-5:5:801`` so negative starts parse."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in GRID_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    argv = _join_grid_flags(sys.argv[1:] if argv is None else list(argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        args = _apply_settings(parser, args, argv)
        rep = args.func(args)
    except (FBHError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if rep.status in OK_STATUSES else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
