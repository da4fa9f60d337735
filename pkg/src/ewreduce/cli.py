"""Command-line front end.

Every subcommand prints one JSON report

    {"command": ..., "params": {...}, "checks": [{"name", "value", "tol", "pass"}], "version": ...}

and exits 0 when every check passes, 1 when a tolerance fails and 2 on
usage errors (unknown command, unknown solution, unsupported request).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__

SCHEMA_VERSION = "1"
DEFAULT_TOL = 1e-10


class UsageError(Exception):
    pass


def _default_tol() -> float:
    raw = os.environ.get("EWREDUCE_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"EWREDUCE_TOL is not a number: {raw!r}") from None


def _check(name, value, tol, passed=None):
    value = float(value)
    ok = bool(value < tol) if passed is None else bool(passed)
    return {"name": name, "value": value, "tol": tol, "pass": ok}


def _params(args):
    from .scalar import Params
    return Params.euclidean(alpha=args.alpha, b=args.b)


def _entry(name, args):
    from . import catalog
    if name not in catalog.NAMES:
        raise UsageError(f"unknown solution {name!r}; known: {', '.join(catalog.NAMES)}")
    return catalog.get(name, _params(args))


# -- subcommands ----------------------------------------------------------------

def cmd_catalog(args):
    from . import catalog
    if args.action != "list":
        raise UsageError("catalog supports only 'list'")
    entries = [catalog.get(n, _params(args)).to_dict() for n in catalog.NAMES]
    return [], {"solutions": entries}


def cmd_verify(args):
    from . import catalog
    e = _entry(args.name, args)
    checks = []
    for rep in catalog.check_claims(e, args.points, args.seed):
        tol = args.tol if args.tol is not None else rep.claim.tol
        if rep.claim.zero:
            checks.append(_check(f"{rep.claim.kind}:{rep.claim.field}", rep.value, tol))
        else:
            checks.append(_check(f"{rep.claim.kind}:{rep.claim.field} (reported)", rep.value, tol, passed=True))
    return checks, {}


def cmd_reduce(args):
    from . import reduction, weyl
    e = _entry(args.name, args)
    tol = args.tol if args.tol is not None else 1e-8
    pts = e.sample(args.points, args.seed)
    checks = []
    if e.structure is not None:
        chi = max(weyl.ew_residual(e.structure, p, e.params).sup for p in pts)
        return [_check("chi", chi, tol)], {}
    if "G" not in e.fields:
        raise UsageError(f"{e.name} is not an alterform solution")
    d = reduction.ReducedData(e.fields["G"], e.params, "alterform")
    build = reduction.build_ew_from_F(d, pts)
    chi = max(weyl.ew_residual(build.ew, p, e.params).sup for p in pts)
    checks.append(_check("chi", chi, tol))
    st = reduction.frame_and_structure(d, pts, e.params)
    from .scalar import evaluate
    tw = np.array([evaluate(st.twist * st.frame.V, p, e.params) for p in pts])
    dv = np.array([evaluate(st.divergence * st.frame.V, p, e.params) for p in pts])
    checks.append(_check("twist*V variation", np.ptp(tw.real) + np.ptp(tw.imag), tol))
    checks.append(_check("divergence*V variation", np.ptp(dv.real) + np.ptp(dv.imag), tol))
    for name, f in (("twist", st.twist), ("divergence", st.divergence)):
        closed = weyl.monopole_closedness(st.ew, st.compact(f), pts, e.params)
        checks.append(_check(f"monopole closedness ({name})", closed, tol))
    extra = {"twist*V": [float(tw.mean().real), float(tw.mean().imag)],
             "divergence*V": [float(dv.mean().real), float(dv.mean().imag)]}
    return checks, extra


def cmd_symmetries(args):
    from . import symmetries
    p = _params(args)
    T, fits = symmetries.commutator_table(p, seed=args.seed)
    tol = args.tol if args.tol is not None else 1e-10
    checks = [_check("max fit residual", fits.max(), tol),
              _check("table vs closed form", np.max(np.abs(T - symmetries.expected_table(p.alpha))), tol),
              _check("antisymmetry", np.max(np.abs(T + T.transpose(1, 0, 2))), tol),
              _check("jacobi", symmetries.jacobi_defect(T), tol)]
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(symmetries.table_csv(T))
    extra = json.loads(symmetries.table_json(T)) if args.table else {}
    return checks, extra


def _lax_points(entry, kind, n, seed):
    from .scalar import u, v, w, wb, wt, z, zt
    rng = np.random.default_rng(seed)

    def c(lo=-0.8, hi=0.8):
        return complex(rng.uniform(lo, hi), rng.uniform(lo, hi))
    out = []
    for _ in range(n):
        if kind == "heavenly":
            pt = {w: c(), wt: c(), z: 0.6 + 0.3 * c(), zt: 0.6 + 0.3 * c()}
        elif kind == "reduced":
            pt = {w: c(), wt: c(), u: c(-0.5, 0.5)}
        else:
            wv = c()
            pt = {w: wv, wb: wv.conjugate(), v: complex(rng.uniform(-1, 1))}
        out.append((pt, c()))
    return out


def cmd_lax(args):
    from . import lax
    e = _entry(args.name, args)
    if "Omega" in e.fields and e.chart.name == "null":
        kind = "heavenly"
    elif e.name == "hypercr_exponential":
        kind = "hypercr"
    elif "G" in e.fields or "F" in e.fields:
        kind = "reduced"
    else:
        raise UsageError(f"no Lax pair for {e.name}")
    lp = lax.build_lax(e, kind)
    tol = args.tol if args.tol is not None else 1e-8
    res = [lax.span_residual(lp, pt, lm) for pt, lm in _lax_points(e, kind, args.samples, args.seed)]
    return [_check(f"span residual ({kind})", max(res), tol)], {"median": float(np.median(res))}


def cmd_recursion(args):
    from . import recursion
    e = _entry(args.name, args)
    if "F" not in e.fields:
        raise UsageError(f"{e.name} has no reduced potential F")
    tol = args.tol if args.tol is not None else 1e-9
    rng = np.random.default_rng(args.seed)
    from .scalar import u, w, wt
    pts = [{w: complex(*rng.uniform(-0.8, 0.8, 2)), wt: complex(*rng.uniform(-0.8, 0.8, 2)),
            u: complex(*rng.uniform(-0.5, 0.5, 2))} for _ in range(args.points)]
    levels = recursion.hierarchy(e.fields["F"], args.depth, pts, e.params)
    checks = []
    for lvl in levels:
        checks.append(_check(f"{lvl.label} linearized", lvl.linearized, tol))
        if lvl.recursion:
            for k, val in lvl.recursion.items():
                checks.append(_check(f"{lvl.label} recursion {k}", val, tol))
    return checks, {"levels": [{"label": lvl.label, "dF": str(lvl.dF)} for lvl in levels]}


def cmd_solve(args):
    from . import solver
    try:
        nx, ny, nv = (int(s) for s in args.grid.split(","))
    except ValueError:
        raise UsageError(f"--grid expects NX,NY,NV, got {args.grid!r}") from None
    grid = solver.Grid3(nx, ny, nv)
    e = _entry(args.bc, args)
    if "G" not in e.fields:
        raise UsageError(f"{e.name} is not an alterform solution")
    exact = solver.sample_field(e.fields["G"], grid, e.params)
    init = exact * (1 + solver.smooth_perturbation(grid, args.perturb))
    t0 = time.perf_counter()
    res = solver.solve_newton(init, grid, e.params, tol=args.tol if args.tol is not None else 1e-10,
                              max_iter=args.max_iter)
    elapsed = time.perf_counter() - t0
    tol = args.tol if args.tol is not None else 1e-10
    checks = [_check("sup discrete residual", res.history[-1], tol),
              _check("converged", 0.0, 1.0, passed=res.converged)]
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(solver.field_csv(res.G, grid))
    if args.history:
        with open(args.history, "w") as fh:
            fh.write(res.to_json())
    extra = {"iterations": res.iterations, "history": res.history,
             "max_change_from_exact": float(np.max(np.abs(res.G - exact)))}
    if args.timestamp:
        extra["seconds"] = elapsed
    return checks, extra


COMMANDS = {"catalog": cmd_catalog, "verify": cmd_verify, "reduce": cmd_reduce, "symmetries": cmd_symmetries,
            "lax": cmd_lax, "recursion": cmd_recursion, "solve": cmd_solve}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=-math.pi / 4)
    common.add_argument("--b", type=float, default=1.0)
    common.add_argument("--tol", type=float, default=None, help="override tolerance (default: per check, or EWREDUCE_TOL)")
    common.add_argument("--points", type=int, default=10)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the JSON report here as well as to stdout")
    common.add_argument("--timestamp", action="store_true", help="include wall-clock fields in the report")

    p = argparse.ArgumentParser(prog="ewreduce", description="Einstein-Weyl reduction checks")
    sub = p.add_subparsers(dest="command")
    c = sub.add_parser("catalog", parents=[common])
    c.add_argument("action", choices=["list"])
    c = sub.add_parser("verify", parents=[common])
    c.add_argument("name")
    c = sub.add_parser("reduce", parents=[common])
    c.add_argument("name")
    c = sub.add_parser("symmetries", parents=[common])
    c.add_argument("--table", action="store_true")
    c.add_argument("--csv")
    c = sub.add_parser("lax", parents=[common])
    c.add_argument("name")
    c.add_argument("--samples", type=int, default=20)
    c = sub.add_parser("recursion", parents=[common])
    c.add_argument("name")
    c.add_argument("--depth", type=int, default=1)
    c = sub.add_parser("solve", parents=[common])
    c.add_argument("--grid", default="17,17,9")
    c.add_argument("--bc", default="rozw1")
    c.add_argument("--perturb", type=float, default=0.05)
    c.add_argument("--max-iter", type=int, default=20)
    c.add_argument("--csv")
    c.add_argument("--history")
    return p


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def run(argv=None) -> int:
    from .scalar import DomainError
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        default_tol = _default_tol()
        if args.tol is None and "EWREDUCE_TOL" in os.environ:
            args.tol = default_tol
        checks, extra = COMMANDS[args.command](args)
    except (UsageError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        print(f"ewreduce: error: {exc}", file=sys.stderr)
        return 2
    params = {"alpha": args.alpha, "b": args.b, "seed": args.seed}
    report = {"command": args.command, "params": params, "checks": checks, "version": SCHEMA_VERSION,
              "package": __version__}
    if args.timestamp:
        report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    report.update(_jsonable(extra))
    text = json.dumps(_jsonable(report), indent=1, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return 0 if all(c["pass"] for c in checks) else 1


def main() -> None:
    sys.exit(run())
