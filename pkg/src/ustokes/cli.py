"""Command-line front end: ``ustokes {construct,verify,decompose,psi,demo-counterexample}``.

Exit codes: 0 when every check passes, 1 when a verification fails, 2 on
invalid input (with a machine-readable diagnostic on stdout).
"""
import argparse
import json
import os
import sys
from importlib import resources

import numpy as np

from . import io
from .constructors import build_flow
from .decompose import recover_AB
from .errors import PathDependenceError, SpecError, StokesError
from .fields import Exp, FluidParams, ScalarField, SolidGrowing, mode
from .generators import random_flow_spec
from .grid import ShellGrid
from .heatkernel import QuadratureDomain, psi_integral
from .operators import CurlR
from .special import lm_pairs
from .verify import (TOL_EXACT, TOL_FD, ResidualReport, biharmonic_heat_residual, condition_residual,
                     continuity_residual, recover_pressure, verify_flow)

DEFAULT_GRID = "r1=0.5,r2=1.5,nr=4,ntheta=8,nphi=16"
DEFAULT_TIMES = "0,0.1,0.5"


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ parsing

def parse_grid(text, times):
    try:
        kv = dict(item.split("=", 1) for item in text.split(",") if item)
        r1, r2 = float(kv.pop("r1")), float(kv.pop("r2"))
        nr, nt, npp = int(kv.pop("nr", 4)), int(kv.pop("ntheta", 8)), int(kv.pop("nphi", 16))
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad --grid value {text!r}: {exc}") from exc
    if kv:
        raise UsageError(f"unknown --grid keys: {', '.join(sorted(kv))}")
    if not 0 < r1 < r2:
        raise UsageError("--grid needs 0 < r1 < r2")
    return ShellGrid.shell(r1, r2, nr, nt, npp, times)


def parse_floats(text, name, count=None):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad {name} value {text!r}") from exc
    if count is not None and len(vals) != count:
        raise UsageError(f"{name} needs {count} comma-separated numbers")
    return vals


def resolve_path(path):
    """Local file if present, else the bundled copy for ``examples/NAME`` or ``NAME``."""
    if os.path.exists(path):
        return path
    bundled = resources.files("ustokes") / "examples" / os.path.basename(path)
    if bundled.is_file():
        return str(bundled)
    raise UsageError(f"no such file: {path}")


def _grid(args):
    times = parse_floats(args.times, "--times")
    if not times:
        raise UsageError("--times needs at least one value")
    return parse_grid(args.grid, times)


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


# ------------------------------------------------------------------ commands

def _load_spec(args):
    if args.random:
        return random_flow_spec(args.seed)
    if not args.spec:
        raise UsageError("give --spec PATH or --random")
    return io.spec_from_json(io.load_json(resolve_path(args.spec)))


def cmd_construct(args):
    spec = _load_spec(args)
    grid = _grid(args)
    sol = build_flow(spec)
    rep = verify_flow(sol, grid=grid, tol_exact=args.tol, tol_fd=args.tol_fd)
    doc = {"spec": io.spec_to_json(spec), "pressure": io.field_to_json(sol.pressure),
           "p0": sol.p0, "provenance": sol.provenance, "homogeneous": sol.homogeneous}
    doc.update(rep.to_dict())
    return doc, rep.summary(), rep.passed


def cmd_verify(args):
    spec = _load_spec(args)
    grid = _grid(args)
    rep = verify_flow(build_flow(spec), grid=grid, tol_exact=args.tol, tol_fd=args.tol_fd)
    return rep.to_dict(), rep.summary(), rep.passed


def cmd_decompose(args):
    if args.samples:
        v, grid = io.read_samples_csv(resolve_path(args.samples))
    else:
        grid = _grid(args)
        v = build_flow(_load_spec(args)).velocity
    lmax = args.lmax if args.lmax is not None else grid.band_limit()
    dec = recover_AB(v, grid, lmax)
    doc = dec.to_dict()
    lines = [f"analysis residual {dec.analysis_residual:.6g}"]
    floor = args.tol
    for which in ("A", "B"):
        for n, m in lm_pairs(lmax):
            if n == 0:
                continue
            c = dec.coeff(which, n, m)
            if np.abs(c).max() > floor:
                for k, t in enumerate(grid.times):
                    vals = " ".join(f"{x:.6g}" for x in c[:, k])
                    lines.append(f"{which}[{n},{m}] t={t:.6g}: {vals}")
    if len(lines) == 1:
        lines.append("all coefficients below threshold")
    lines.insert(0, "radii " + " ".join(f"{r:.6g}" for r in grid.r_nodes))
    return doc, "\n".join(lines), True


def _pressure_field(doc):
    if isinstance(doc, list):
        return io.field_from_json(doc), None
    params = None
    if "nu" in doc and "mu" in doc:
        params = FluidParams(float(doc["nu"]), float(doc["mu"]), float(doc.get("rho", doc["mu"] / doc["nu"])))
    key = "pressure" if "pressure" in doc else "p"
    if key not in doc:
        raise UsageError("pressure file needs a 'pressure' mode list")
    return io.field_from_json(doc[key]), params


def cmd_psi(args):
    p, params = _pressure_field(io.load_json(resolve_path(args.pressure)))
    if params is None or args.nu is not None:
        nu = args.nu if args.nu is not None else 1.0
        mu = args.mu if args.mu is not None else 1.0
        params = FluidParams.from_nu_mu(nu, mu)
    budget = dict(zip(("n_time", "n_r", "n_theta", "n_phi"), (int(x) for x in parse_floats(args.budget, "--budget", 4))))
    if args.shell:
        r1, r2 = parse_floats(args.shell, "--shell", 2)
        dom = QuadratureDomain.shell(r1, r2, **budget)
    else:
        dom = QuadratureDomain.ball(args.ball, **budget)
    pts = [parse_floats(s, "--point", 3) for s in args.point or ["0,0,0"]]
    values = [psi_integral(p, x, args.t, dom, params, kernel=args.kernel, tol=args.quad_tol) for x in pts]
    doc = {"t": args.t, "kernel": args.kernel, "points": pts, "psi": values}
    lines = [f"psi({x[0]:.6g},{x[1]:.6g},{x[2]:.6g}; t={args.t:.6g}) = {v:.6g}" for x, v in zip(pts, values)]
    return doc, "\n".join(lines), True


def counterexample_velocity(nu):
    """V = (y, -x, 0) e^{nu t} = curl(r B) with B = -z e^{nu t}."""
    B = ScalarField((mode(1, 0, SolidGrowing(), Exp(nu), -np.sqrt(4 * np.pi / 3)),))
    return CurlR(B)


def cmd_demo(args):
    params = FluidParams.from_nu_mu(args.nu, args.mu)
    V = counterexample_velocity(params.nu)
    grid = _grid(args)
    rep = ResidualReport({})
    rep.merge(continuity_residual(V, grid, args.tol, args.tol_fd))
    rep.merge(biharmonic_heat_residual(V, grid, params, args.tol))
    per_time = []
    for t in grid.times:
        g1 = ShellGrid(grid.r_nodes, grid.n_theta, grid.n_phi, (t,))
        e = condition_residual(V, g1, params, args.tol, args.tol_fd).entries["condition"]
        per_time.append({"t": t, "max": e.max_abs, "expected": 2 * np.exp(params.nu * t)})
    rep.merge(condition_residual(V, grid, params, args.tol, args.tol_fd))
    try:
        recover_pressure(V, grid, params)
        loop = None
        lines_p = ["recover_pressure: succeeded (unexpected)"]
    except PathDependenceError as exc:
        loop = {"t": exc.time, "loop_integral": exc.loop_integral,
                "expected": 2 * np.pi * params.mu * np.exp(params.nu * exc.time)}
        lines_p = [f"PathDependenceError: loop integral {exc.loop_integral:.6g} at t={exc.time:.6g} "
                   f"(2 pi mu e^(nu t) = {loop['expected']:.6g})"]
    doc = rep.to_dict()
    doc.update({"condition_by_time": per_time, "path_dependence": loop, "stokes": False})
    lines = [rep.summary()]
    lines += [f"condition t={c['t']:.6g}: max={c['max']:.6g} (2 e^(nu t) = {c['expected']:.6g})" for c in per_time]
    lines += lines_p + ["V is not a Stokes velocity"]
    return doc, "\n".join(lines), False


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "decompose": cmd_decompose,
            "psi": cmd_psi, "demo-counterexample": cmd_demo}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", default=DEFAULT_GRID, help="r1=A,r2=B,nr=N,ntheta=N,nphi=N")
    common.add_argument("--times", default=DEFAULT_TIMES, help="comma-separated sample times")
    common.add_argument("--tol", type=_positive, default=TOL_EXACT, help="exact-path tolerance")
    common.add_argument("--tol-fd", type=_positive, default=TOL_FD, help="finite-difference tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the JSON report to this path")
    common.add_argument("--json", action="store_true", help="print JSON instead of a summary")

    parser = argparse.ArgumentParser(prog="ustokes", description="Exact unsteady Stokes flows: build, verify, decompose.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("construct", "verify"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--spec")
        sp.add_argument("--random", action="store_true", help="use a seeded random spec")
    sp = sub.add_parser("decompose", parents=[common])
    sp.add_argument("--samples", help="CSV with r,theta,phi,t,vx,vy,vz")
    sp.add_argument("--spec")
    sp.add_argument("--random", action="store_true")
    sp.add_argument("--lmax", type=int)
    sp = sub.add_parser("psi", parents=[common])
    sp.add_argument("--pressure", required=True)
    sp.add_argument("--ball", type=_positive, default=2.0)
    sp.add_argument("--shell", help="r1,r2")
    sp.add_argument("--point", action="append", help="x,y,z (repeatable)")
    sp.add_argument("--t", type=_positive, required=True)
    sp.add_argument("--nu", type=_positive)
    sp.add_argument("--mu", type=_positive)
    sp.add_argument("--budget", default="32,48,24,48", help="n_time,n_r,n_theta,n_phi")
    sp.add_argument("--kernel", choices=("unit", "literal"), default="unit")
    sp.add_argument("--quad-tol", type=_positive)
    sp = sub.add_parser("demo-counterexample", parents=[common])
    sp.add_argument("--nu", type=_positive, default=1.0)
    sp.add_argument("--mu", type=_positive, default=1.0)
    sp.set_defaults(times="0,1")
    return parser


def _diagnostic(exc):
    doc = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("equation", "residual", "flux", "loop_integral"):
        val = getattr(exc, attr, None)
        if val is not None:
            doc[attr] = val
    return doc


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        doc, summary, passed = COMMANDS[args.command](args)
    except (UsageError, StokesError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(io.dumps(_diagnostic(exc)))
        return 2
    text = io.dumps(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text if args.json else summary)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
