"""Verification pipelines shared by the command line and the bundled reproductions.

Each function takes parsed objects and returns a RunReport; nothing here
touches argv or stdout.
"""
from __future__ import annotations

import csv
import itertools
from fractions import Fraction

from . import exactmath as em
from . import lsa
from .connection import (Connection, VectorField, covariant_derivative, curvature,
                         describe_flatness_witness, envelope_fields, is_flat_affine,
                         is_infinitesimal_affine, solve_polynomial_affine_fields, torsion)
from .errors import CapExceeded, JacobiFailure
from .framebundle import (FrameBundleChart, eta_residual, lie_derivative_form, natural_lift, omega,
                          orbit_map_rank, probe_pairs, structure_residuals, theta)
from .liegroup import (GroupChart, builtin, christoffels_from_lsa, frame_structure_constants,
                       verify_left_invariance)
from .report import RunReport, grid

# -- formatting ---------------------------------------------------------------


def fmt_q(v) -> str:
    return str(Fraction(v))


def fmt_triple(t, labels):
    return "(" + ",".join(labels[i] for i in t) + ")"


def fmt_matrix(M) -> str:
    rows = [[em.fmt(e) if isinstance(e, em.FracElement) else fmt_q(e) for e in r] for r in M.entries]
    width = max((len(c) for r in rows for c in r), default=1)
    return "\n".join("[ " + "  ".join(c.rjust(width) for c in r) + " ]" for r in rows)


def fmt_nonzero(M) -> str:
    """Nonzero entries of a matrix as (row,col)=value, 1-based."""
    out = [f"({i + 1},{j + 1})={em.fmt(M[i, j])}" for i in range(M.rows) for j in range(M.cols)
           if M[i, j] != 0]
    return ", ".join(out) or "0"


def coordinate_names(n):
    return ("x", "y", "z")[:n] if n <= 3 else tuple(f"x{i + 1}" for i in range(n))


def field_expression(X: VectorField) -> str:
    return str(X)


def combination_or_expression(span: em.FieldSpan, labels, X: VectorField) -> str:
    c = span.coordinates(X.components)
    if c is None:
        return f"{field_expression(X)} [outside span]"
    return lsa.format_combination(c, labels)


def christoffel_table(conn: Connection) -> str:
    names = conn.chart.variables
    rows = []
    for k, i, j in itertools.product(range(conn.dim), repeat=3):
        v = conn.gamma[k][i][j]
        if v != 0:
            rows.append((f"Gamma^{names[k]}_{names[i]}{names[j]}", em.fmt(v)))
    return grid(("symbol", "value"), rows) if rows else "all Christoffel symbols vanish"


def fields_table(named) -> str:
    return grid(("field", "components"), [(n, f.render()) for n, f in named])


# -- lsa ------------------------------------------------------------------------


def _violation_list(A, violations):
    return ", ".join(fmt_triple(t, A.basis_labels) for t, _ in violations)


def lsa_check(A, command="lsa check") -> RunReport:
    rep = RunReport(command)
    labels = A.basis_labels
    rows = [(labels[i], labels[j], A.format_product(A.c[i][j]))
            for i in range(A.dim) for j in range(A.dim)]
    rep.table("products", grid(("left", "right", "product"), rows))
    v = lsa.check_left_symmetric(A)
    rep.check("left-symmetric", v.holds, None if v else
              f"triple {fmt_triple(v.witness, labels)} has associator discrepancy "
              f"{A.format_product(v.detail)}")
    v = lsa.check_associative(A)
    rep.check("associative", v.holds, None if v else
              f"triple {fmt_triple(v.witness, labels)} has associator {A.format_product(v.detail)}; "
              f"{len(v.violations)} violating triples: {_violation_list(A, v.violations)}")
    return rep


def lsa_commutator(A, command="lsa commutator") -> RunReport:
    rep = RunReport(command)
    labels = A.basis_labels
    try:
        L = lsa.commutator_algebra(A)
    except JacobiFailure as exc:
        rep.check("Jacobi identity", False, f"triple {fmt_triple(exc.triple, labels)} "
                  f"has Jacobiator {A.format_product(exc.residual)}")
        return rep
    rows = [(labels[i], labels[j], A.format_product(L.b[i][j]))
            for i in range(A.dim) for j in range(i + 1, A.dim)]
    rep.table("brackets [a, b] = ab - ba", grid(("a", "b", "[a, b]"), rows))
    rep.check("Jacobi identity", True)
    return rep


def lsa_rep(A, command="lsa rep") -> RunReport:
    rep = RunReport(command)
    reps = lsa.affine_rep(A)
    for label, r in zip(A.basis_labels, reps):
        rep.table(f"eta({label})", fmt_matrix(r.matrix))
    L = lsa.commutator_algebra(A)
    v = lsa.check_lie_homomorphism(reps, L)
    rep.check("eta is a Lie algebra homomorphism", v.holds,
              None if v else f"pair {fmt_triple(v.witness, A.basis_labels)}")
    return rep


def _matching_group(A):
    """A built-in group whose left-frame bracket equals the commutator of A, if any."""
    L = lsa.commutator_algebra(A)
    n = A.dim
    candidates = [f"abelian({n})"]
    if n == 2:
        candidates.append("aff_r")
    root = int(round(n ** 0.5))
    if root * root == n and root > 1:
        candidates.append(f"gl({root})")
    for name in candidates:
        g = builtin(name)
        b = frame_structure_constants(g.left_frame)
        if b is not None and all(tuple(b[i][j]) == tuple(L.b[i][j])
                                 for i in range(n) for j in range(n)):
            return g
    return None


def lsa_envelope(A, cap=None, command="lsa envelope") -> RunReport:
    rep = RunReport(command)
    reps = lsa.affine_rep(A)
    labels = A.basis_labels
    res = lsa.matrix_envelope(reps, cap)
    names = []
    for step in res.trace:
        if step[0] == "generator":
            names.append(f"eta({labels[step[1]]})")
        else:
            names.append(f"{names[step[1]]}*{names[step[2]]}")
    rows = [(str(k + 1), names[k], "generator" if s[0] == "generator" else f"product {s[1] + 1}*{s[2] + 1}")
            for k, s in enumerate(res.trace)]
    rep.table(f"matrix envelope: dimension {res.dim}", grid(("#", "element", "origin"), rows))
    for k, M in enumerate(res.basis):
        rep.table(f"basis element {k + 1}", fmt_matrix(M))
    rep.check("matrix envelope closed under composition", True)
    g = _matching_group(A)
    if g is None:
        rep.table("cross-check", "no built-in group carries this bracket; field route skipped")
        return rep
    conn = christoffels_from_lsa(g, A)
    env = envelope_fields(conn, list(g.right_frame), cap=None if cap is None else max(cap, g.dim))
    agree = "agree" if env.dim == res.dim else "differ"
    rep.table("cross-check", grid(("route", "group", "dimension"), [
        ("matrix envelope of eta", "-", str(res.dim)),
        ("field envelope of right-invariant fields", g.name, str(env.dim)),
    ]) + f"\nroutes {agree}")
    return rep


def lsa_orbit(A, k, out_path, command="lsa orbit") -> RunReport:
    rep = RunReport(command)
    reps = lsa.affine_rep(A)
    n = A.dim
    pts = lsa.orbit_sample(reps, lsa.uniform_grid(k, n))
    ts = lsa.uniform_grid(k, n)
    header = [f"t{i + 1}" for i in range(n)] + list(coordinate_names(n))
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, p in zip(ts, pts):
            w.writerow([repr(float(v)) for v in t] + [repr(v) for v in p])
    J = lsa.orbit_jacobian_at_origin(reps)
    rep.table("orbit map differential at the origin", fmt_matrix(J))
    rep.table("samples", f"{len(pts)} rows, header {','.join(header)}")
    rep.check("differential at the origin is the identity", J == em.ExactMatrix.identity(n),
              None if J == em.ExactMatrix.identity(n) else "see differential table")
    rep.artifact(out_path)
    return rep


# -- connections ------------------------------------------------------------------


def flatness_check(rep: RunReport, conn: Connection):
    v = is_flat_affine(conn)
    rep.check("flat affine (torsion and curvature vanish)", v.holds,
              None if v else describe_flatness_witness(conn, v))
    return v.holds


def conn_check(conn: Connection, command="conn check") -> RunReport:
    rep = RunReport(command)
    rep.table("Christoffel symbols", christoffel_table(conn))
    names = conn.chart.variables
    n = conn.dim
    T = torsion(conn)
    R = curvature(conn)
    trows = [(f"T^{names[k]}_{names[i]}{names[j]}", em.fmt(T[k][i][j]))
             for k in range(n) for i in range(n) for j in range(i + 1, n) if T[k][i][j] != 0]
    rrows = [(f"R^{names[l]}_{names[i]}{names[j]}{names[k]}", em.fmt(R[l][i][j][k]))
             for l in range(n) for i in range(n) for j in range(i + 1, n) for k in range(n)
             if R[l][i][j][k] != 0]
    rep.table("torsion", grid(("component", "value"), trows) if trows else "zero")
    rep.table("curvature", grid(("component", "value"), rrows) if rrows else "zero")
    flatness_check(rep, conn)
    return rep


def product_table_report(rep: RunReport, conn: Connection, named, title="product table XY = nabla_X Y"):
    """Full table with input labels; returns the coordinate table or None if some product escapes."""
    labels = tuple(n for n, _ in named)
    fields = [f for _, f in named]
    span = em.FieldSpan(conn.chart.field)
    for f in fields:
        span.add(f.components)
    rows, table, closed = [], [], True
    for i, X in enumerate(fields):
        row, coords = [labels[i]], []
        for Y in fields:
            p = covariant_derivative(conn, X, Y)
            c = span.coordinates(p.components)
            closed &= c is not None
            coords.append(c)
            row.append(combination_or_expression(span, labels, p))
        rows.append(row)
        table.append(tuple(coords))
    rep.table(title, grid(("",) + labels, rows))
    return tuple(table) if closed else None


def affine_checks(rep: RunReport, conn: Connection, named):
    bad = []
    for name, X in named:
        v = is_infinitesimal_affine(conn, X)
        if not v:
            bad.append(f"{name} (defect on coordinate pair {v.witness})")
    rep.check("all fields are infinitesimal affine transformations", not bad, "; ".join(bad) or None)
    return not bad


def conn_table(conn: Connection, named, command="conn table"):
    rep = RunReport(command)
    rep.table("fields", fields_table(named))
    if not flatness_check(rep, conn):
        return rep, None
    affine_checks(rep, conn, named)
    table = product_table_report(rep, conn, named)
    rep.check("table closes in the span of the fields", table is not None,
              None if table is not None else "products flagged [outside span]")
    return rep, table


def conn_solve(conn: Connection, degree: int, command="conn solve") -> RunReport:
    rep = RunReport(command)
    if not flatness_check(rep, conn):
        return rep
    basis = solve_polynomial_affine_fields(conn, degree)
    n = conn.dim
    rep.table(f"polynomial affine fields of degree <= {degree}: dimension {len(basis)}",
              grid(("#", "field"), [(str(k + 1), field_expression(X)) for k, X in enumerate(basis)]))
    bad = [k + 1 for k, X in enumerate(basis) if not is_infinitesimal_affine(conn, X)]
    rep.check("every basis field satisfies the affine criterion", not bad, bad or None)
    rep.check(f"dimension <= n^2 + n = {n * n + n}", len(basis) <= n * n + n,
              None if len(basis) <= n * n + n else str(len(basis)))
    return rep


def envelope_report(rep: RunReport, conn: Connection, named, generators, cap=None):
    """Run the field envelope and render its basis; returns the ClosureResult or None."""
    gens = [f for n, f in named if n in generators]
    labels = [n for n, f in named if n in generators]
    try:
        env = envelope_fields(conn, gens, cap=cap, labels=labels)
    except CapExceeded as exc:
        rep.check("envelope within cap", False, str(exc))
        return None
    span_all = em.FieldSpan(conn.chart.field)
    all_labels = tuple(n for n, _ in named)
    for _, f in named:
        span_all.add(f.components)
    rows = []
    for k, (lab, X) in enumerate(zip(env.labels, env.basis)):
        rows.append((str(k + 1), lab, combination_or_expression(span_all, all_labels, X)))
    rep.table(f"envelope of {{{', '.join(labels)}}}: dimension {env.dim}",
              grid(("#", "element", "in input fields"), rows))
    return env


def conn_envelope(conn: Connection, named, generators=None, cap=None, command="conn envelope"):
    rep = RunReport(command)
    if not flatness_check(rep, conn):
        return rep, None
    generators = generators or [n for n, _ in named]
    missing = [g for g in generators if g not in dict(named)]
    if missing:
        raise KeyError(f"unknown generator names: {', '.join(missing)}")
    sel = [(n, f) for n, f in named if n in generators]
    if not affine_checks(rep, conn, sel):
        return rep, None
    env = envelope_report(rep, conn, named, generators, cap)
    if env is not None:
        rep.check("envelope within cap", True)
        v = lsa.check_associative(env.structure_constants())
        rep.check("envelope product is associative", v.holds,
                  None if v else f"triple {fmt_triple(v.witness, env.labels)}")
    return rep, env


# -- groups ---------------------------------------------------------------------


def group_show(g: GroupChart, command="group show") -> RunReport:
    rep = RunReport(command)
    rep.table("chart", f"variables {', '.join(g.chart.variables)}; nonvanishing "
              f"{', '.join(em.fmt(p) for p in g.chart.nonvanishing) or 'none'}; identity "
              f"({', '.join(fmt_q(v) for v in g.identity)})")
    rep.table("left-invariant frame", fields_table([(f"e{a + 1}+", X) for a, X in enumerate(g.left_frame)]))
    rep.table("right-invariant frame", fields_table([(f"e{a + 1}-", X) for a, X in enumerate(g.right_frame)]))
    b = frame_structure_constants(g.left_frame)
    labels = tuple(f"e{a + 1}" for a in range(g.dim))
    rep.check("left frame has constant structure constants", b is not None,
              None if b is not None else "some bracket has non-constant frame coordinates")
    if b is not None:
        rows = [(labels[i], labels[j], lsa.format_combination(b[i][j], labels))
                for i in range(g.dim) for j in range(i + 1, g.dim)]
        rep.table("brackets of the left frame", grid(("a", "b", "[a, b]"), rows) if rows else "abelian")
    return rep


def group_derive(g: GroupChart, A, command="group derive"):
    rep = RunReport(command)
    conn = christoffels_from_lsa(g, A)
    rep.table("Christoffel symbols", christoffel_table(conn))
    v = verify_left_invariance(g, conn, A)
    rep.check("left-invariant products match the algebra", v.holds,
              None if v else f"pair {fmt_triple(v.witness, A.basis_labels)}")
    flatness_check(rep, conn)
    if is_flat_affine(conn):
        affine_checks(rep, conn, [(f"e{a + 1}-", X) for a, X in enumerate(g.right_frame)])
    return rep, conn


# -- frame bundle -----------------------------------------------------------------


def probe_labels(n):
    return [f"B(e{i + 1})" for i in range(n)] + [f"E{i + 1}{j + 1}*" for i in range(n) for j in range(n)]


def fb_check(conn: Connection, command="fb check") -> RunReport:
    rep = RunReport(command)
    fb = FrameBundleChart(conn.chart)
    probes = fb.probe_set(conn)
    labels = probe_labels(fb.n)
    eta_bad, struct_bad = [], []
    for a, b in probe_pairs(probes):
        vec, mat = eta_residual(fb, conn, probes[a], probes[b])
        if not (vec.is_zero() and mat.is_zero()):
            eta_bad.append((a, b, vec, mat))
        Th, Om = structure_residuals(fb, conn, probes[a], probes[b])
        if not (Th.is_zero() and Om.is_zero()):
            struct_bad.append((a, b, Th, Om))
    pairs = len(probe_pairs(probes))
    rep.table("probe set", ", ".join(labels) + f" ({pairs} pairs)")
    rows = [(f"{labels[a]}, {labels[b]}", fmt_nonzero(v), fmt_nonzero(m)) for a, b, v, m in eta_bad]
    rep.table("nonzero eta residuals", grid(("pair", "theta part", "omega part"), rows) if rows else "none")
    rows = [(f"{labels[a]}, {labels[b]}", fmt_nonzero(t), fmt_nonzero(o)) for a, b, t, o in struct_bad]
    rep.table("nonzero structure residuals", grid(("pair", "Theta", "Omega"), rows) if rows else "none")
    flat = flatness_check(rep, conn)

    def witness(bad, first, second):
        a, b, x, y = bad[0]
        return f"pair ({labels[a]}, {labels[b]}): {first} {fmt_nonzero(x)}; {second} {fmt_nonzero(y)}"

    rep.check("eta is a homomorphism on all probe pairs", not eta_bad,
              witness(eta_bad, "theta", "omega") if eta_bad else None)
    rep.check("structure equations give Theta = Omega = 0", not struct_bad,
              witness(struct_bad, "Theta", "Omega") if struct_bad else None)
    consistent = flat == (not eta_bad) == (not struct_bad)
    rep.check("flatness, eta residuals and structure residuals agree", consistent,
              None if consistent else f"flat={flat}, eta zero={not eta_bad}, structure zero={not struct_bad}")
    return rep


def lift_residuals_vanish(fb, conn, X, probes):
    Z = natural_lift(fb, X)
    th = all(M.is_zero() for M in lie_derivative_form(fb, Z, theta(fb), probes))
    om = all(M.is_zero() for M in lie_derivative_form(fb, Z, omega(fb, conn), probes))
    return th, om


def fb_lift(conn: Connection, named, command="fb lift") -> RunReport:
    rep = RunReport(command)
    fb = FrameBundleChart(conn.chart)
    probes = fb.probe_set(conn)
    rows, disagree = [], []
    for name, X in named:
        aff = bool(is_infinitesimal_affine(conn, X))
        th, om = lift_residuals_vanish(fb, conn, X, probes)
        ok = aff == (th and om)
        if not ok:
            disagree.append(name)
        rows.append((name, "yes" if aff else "no", "0" if th else "nonzero", "0" if om else "nonzero",
                     "yes" if ok else "NO"))
    rep.table("natural lifts", grid(("field", "affine", "L theta", "L omega", "agree"), rows))
    rep.check("lift residuals vanish exactly for affine fields", not disagree,
              ", ".join(disagree) or None)
    return rep


def bundle_point(fb, point):
    """Base point padded with the identity frame, or a full bundle point."""
    point = [Fraction(p) for p in point]
    n = fb.n
    if len(point) == n:
        point += [Fraction(int(i == j)) for i in range(n) for j in range(n)]
    return tuple(point)


def fb_rank(conn: Connection, named, points, command="fb rank") -> RunReport:
    rep = RunReport(command)
    fb = FrameBundleChart(conn.chart)
    fields = [f for _, f in named]
    rows = []
    for p in points:
        u = bundle_point(fb, p)
        rows.append(("(" + ", ".join(fmt_q(v) for v in u) + ")",
                     str(orbit_map_rank(fb, conn, fields, u))))
    rep.table(f"rank of theta-evaluation of lifts of {', '.join(n for n, _ in named)}",
              grid(("bundle point", "rank"), rows))
    return rep


def parse_point(text: str):
    try:
        return tuple(Fraction(t.strip()) for t in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"bad point {text!r}; expected comma-separated rationals") from None
