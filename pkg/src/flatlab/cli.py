"""flatlab command line: ``flatlab lsa|conn|group|fb|reproduce ...``."""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np
import sympy
from scipy.integrate import solve_ivp

from . import io, pipelines as pl, reproduce
from .errors import FlatlabError, GoldenMismatch, UnknownName
from .liegroup import builtin
from .report import RunReport


def _lsa(path):
    return io.lsa_from_json(io.load(path))


def _conn(path):
    return io.connection_from_json(io.load(path))


def _fields(path, conn):
    if path is None:
        raise FlatlabError("this subcommand needs a fields.json argument")
    return io.fields_from_json(io.load(path), conn.chart)


def _group(spec):
    try:
        return builtin(spec)
    except UnknownName:
        try:
            doc = io.load(spec)
        except FileNotFoundError:
            raise UnknownName(f"{spec!r} is neither a built-in group (aff_r, abelian(n), gl(n)) "
                              "nor a group.json file") from None
        return io.group_from_json(doc)


def cmd_lsa(args) -> RunReport:
    A = _lsa(args.path)
    command = f"lsa {args.action} {args.path}"
    if args.action == "check":
        return pl.lsa_check(A, command)
    if args.action == "commutator":
        return pl.lsa_commutator(A, command)
    if args.action == "rep":
        return pl.lsa_rep(A, command)
    if args.action == "envelope":
        return pl.lsa_envelope(A, args.cap, command)
    out = args.out or "orbit.csv"
    return pl.lsa_orbit(A, args.grid, out, f"{command} --grid {args.grid}")


def _flow(conn, named, args) -> RunReport:
    """Numeric integral curve of one field; floats, not verified."""
    rep = RunReport(f"conn flow {args.path} {args.fields} --field {args.field}")
    fields = dict(named)
    if args.field not in fields:
        raise KeyError(f"no field named {args.field!r}")
    X = fields[args.field]
    syms = [sympy.Symbol(v) for v in conn.chart.variables]
    fns = [sympy.lambdify(syms, c.as_expr(), "math") for c in X.components]
    start = [float(v) for v in pl.parse_point(args.start)]
    if len(start) != conn.dim:
        raise ValueError(f"start point needs {conn.dim} coordinates")
    ts = np.linspace(0.0, args.t_max, args.steps + 1)
    sol = solve_ivp(lambda t, p: [f(*p) for f in fns], (0.0, args.t_max), start, t_eval=ts,
                    rtol=1e-10, atol=1e-12)
    out = args.out or "flow.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + list(conn.chart.variables))
        for k, t in enumerate(sol.t):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in sol.y[:, k]])
    rep.table("flow", f"{len(sol.t)} samples of {args.field} from ({args.start}); "
              f"solver status: {sol.message}; numeric output, not verified")
    rep.artifact(out)
    return rep


def cmd_conn(args) -> RunReport:
    conn = _conn(args.path)
    command = f"conn {args.action} {args.path}" + (f" {args.fields}" if args.fields else "")
    if args.action == "check":
        return pl.conn_check(conn, command)
    if args.action == "solve":
        return pl.conn_solve(conn, args.degree, f"{command} --degree {args.degree}")
    named = _fields(args.fields, conn)
    if args.action == "table":
        return pl.conn_table(conn, named, command)[0]
    if args.action == "envelope":
        gens = args.generators.split(",") if args.generators else None
        return pl.conn_envelope(conn, named, gens, args.cap, command)[0]
    return _flow(conn, named, args)


def cmd_group(args) -> RunReport:
    g = _group(args.group)
    if args.action == "show":
        return pl.group_show(g, f"group show {args.group}")
    if not args.lsa:
        raise FlatlabError("group derive needs an lsa.json argument")
    rep, conn = pl.group_derive(g, _lsa(args.lsa), f"group derive {args.group} {args.lsa}")
    if args.out:
        io.dump(io.connection_to_json(conn), args.out)
        rep.artifact(args.out)
    return rep


def cmd_fb(args) -> RunReport:
    conn = _conn(args.path)
    command = f"fb {args.action} {args.path}" + (f" {args.fields}" if args.fields else "")
    if args.action == "check":
        return pl.fb_check(conn, command)
    named = _fields(args.fields, conn)
    if args.action == "lift":
        return pl.fb_lift(conn, named, command)
    if not args.point:
        raise FlatlabError("fb rank needs at least one --point")
    return pl.fb_rank(conn, named, [pl.parse_point(p) for p in args.point], command)


def cmd_reproduce(args):
    ids = list(reproduce.EXAMPLES) if args.example == "all" else [args.example]
    status = 0
    for ex in ids:
        text = reproduce.run(ex).render()
        if args.regolden:
            path = reproduce.write_golden(ex, text)
            print(f"wrote {path}")
            if args.verify:
                again = reproduce.run(ex).render()
                try:
                    reproduce.compare_golden(ex, again)
                    print(f"golden {ex}: regenerated output is byte-identical")
                except GoldenMismatch as exc:
                    print(exc.diff, file=sys.stderr)
                    status = 1
            continue
        sys.stdout.write(text)
        try:
            reproduce.compare_golden(ex, text)
            print(f"golden {ex}: identical")
        except GoldenMismatch as exc:
            print(f"golden {ex}: MISMATCH", file=sys.stderr)
            print(exc.diff, file=sys.stderr)
            status = 1
        if text.count("[FAIL]"):
            status = 1
    return status


def build_parser():
    p = argparse.ArgumentParser(prog="flatlab", description="Exact computations with flat affine "
                                "connections, left-symmetric algebras and associative envelopes.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lsa", help="left-symmetric algebras from lsa.json")
    s.add_argument("action", choices=["check", "commutator", "envelope", "rep", "orbit"])
    s.add_argument("path")
    s.add_argument("--cap", type=int, help="maximum envelope dimension")
    s.add_argument("--grid", type=int, default=21, help="orbit samples per axis (default 21)")
    s.add_argument("--out", help="CSV path for orbit samples (default orbit.csv)")
    s.set_defaults(func=cmd_lsa)

    s = sub.add_parser("conn", help="connections from connection.json")
    s.add_argument("action", choices=["check", "table", "solve", "envelope", "flow"])
    s.add_argument("path")
    s.add_argument("fields", nargs="?", help="fields.json (table, envelope, flow)")
    s.add_argument("--degree", type=int, default=2, help="polynomial degree for solve (default 2)")
    s.add_argument("--cap", type=int, help="maximum envelope dimension (default n^2 + n)")
    s.add_argument("--generators", help="comma-separated field names generating the envelope")
    s.add_argument("--field", help="field to integrate (flow)")
    s.add_argument("--start", default="1.5,-1", help="initial point for flow")
    s.add_argument("--t-max", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--out", help="CSV path for flow samples (default flow.csv)")
    s.set_defaults(func=cmd_conn)

    s = sub.add_parser("group", help="built-in or group.json Lie group charts")
    s.add_argument("action", choices=["show", "derive"])
    s.add_argument("group", help="aff_r, abelian(n), gl(n) or a group.json path")
    s.add_argument("lsa", nargs="?", help="lsa.json for derive")
    s.add_argument("--out", help="write the derived connection.json here")
    s.set_defaults(func=cmd_group)

    s = sub.add_parser("fb", help="frame bundle checks")
    s.add_argument("action", choices=["check", "lift", "rank"])
    s.add_argument("path")
    s.add_argument("fields", nargs="?")
    s.add_argument("--point", action="append", help="base or bundle point, comma separated; repeatable")
    s.set_defaults(func=cmd_fb)

    s = sub.add_parser("reproduce", aliases=["paper"], help="bundled reproductions with golden diffs")
    s.add_argument("example", nargs="?", default="all", choices=list(reproduce.EXAMPLES) + ["all"])
    s.add_argument("--regolden", action="store_true", help="rewrite the golden files")
    s.add_argument("--verify", action="store_true", help="with --regolden, rerun and require identical output")
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.func is cmd_reproduce:
            return cmd_reproduce(args)
        rep = args.func(args)
    except (FlatlabError, FileNotFoundError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2
    sys.stdout.write(rep.render())
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
