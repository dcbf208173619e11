"""Bundled end-to-end reproductions, each diffed against a stored golden report."""
from __future__ import annotations

import difflib
import itertools
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import exactmath as em
from . import lsa, pipelines as pl, reference as ref
from .connection import Chart, Connection, envelope_fields
from .errors import GoldenMismatch
from .framebundle import FrameBundleChart, orbit_map_rank
from .liegroup import builtin, christoffels_from_lsa, mixed_products_gl, verify_left_invariance
from .report import RunReport, grid


def _named(chart, spec):
    return [(n, chart.field_from(list(v))) for n, v in spec.items()]


def _same_span(K, a, b):
    sa, sb = em.FieldSpan(K), em.FieldSpan(K)
    da = sum(sa.add(X.components) for X in a)
    db = sum(sb.add(X.components) for X in b)
    return da == db and all(sa.coordinates(X.components) is not None for X in b)


def _first_table_difference(got, want, labels):
    for i, j in itertools.product(range(len(labels)), repeat=2):
        if got[i][j] is None or tuple(got[i][j]) != tuple(want[i][j]):
            have = "outside span" if got[i][j] is None else lsa.format_combination(got[i][j], labels)
            return (f"{labels[i]}*{labels[j]} = {have}, expected "
                    f"{lsa.format_combination(want[i][j], labels)}")
    return None


def punctured_plane() -> RunReport:
    """Linear fields on the punctured plane with the standard flat connection."""
    rep = RunReport("reproduce ex3_8")
    chart = Chart(("x", "y"), ("x^2 + y^2",))
    conn = Connection.flat(chart)
    named = [("xdx", chart.field_from(["x", "0"])), ("ydx", chart.field_from(["y", "0"])),
             ("xdy", chart.field_from(["0", "x"])), ("ydy", chart.field_from(["0", "y"]))]
    rep.table("fields", pl.fields_table(named))
    pl.flatness_check(rep, conn)
    pl.affine_checks(rep, conn, named)
    table = pl.product_table_report(rep, conn, named)
    rep.check("product table closes in the span, dimension 4", table is not None and len(named) == 4,
              None if table is not None else "some product escapes")
    if table is None:
        return rep
    A = lsa.StructureConstants(4, table, tuple(n for n, _ in named))
    v = lsa.check_associative(A)
    rep.check("product is associative", v.holds, None if v else pl.fmt_triple(v.witness, A.basis_labels))
    # X.Y for linear fields v -> Mv, v -> Nv is v -> NMv: the opposite of composition
    gl = lsa.matrix_unit_algebra(2).opposite()
    rep.check("table equals opposite matrix composition on (E11, E12, E21, E22)", A.c == gl.c,
              None if A.c == gl.c else "structure constants differ")
    return rep


def affine_line_group() -> RunReport:
    """Left-invariant flat structure on Aff(R)_0: table of affine fields and envelope."""
    rep = RunReport("reproduce ex3_9")
    g = builtin("aff_r")
    A = lsa.eq14_algebra()
    conn = christoffels_from_lsa(g, A)
    rep.table("Christoffel symbols", pl.christoffel_table(conn))
    v = verify_left_invariance(g, conn, A)
    rep.check("left-invariant products match the algebra", v.holds, None if v else str(v.witness))
    if not pl.flatness_check(rep, conn):
        return rep
    named = _named(g.chart, ref.AFFR_FIELDS)
    rep.table("fields", pl.fields_table(named))
    pl.affine_checks(rep, conn, named)
    right = [(f"e{a + 1}-", X) for a, X in enumerate(g.right_frame)]
    rep.check("e1-, e2- are the right-invariant frame",
              all(dict(named)[n] == X for n, X in right), "frame mismatch")
    table = pl.product_table_report(rep, conn, named)
    want = ref.affr_table_coordinates()
    diff = _first_table_difference(table, want, ref.AFFR_LABELS) if table else "table not closed"
    rep.check("all 36 products equal the reference table", diff is None, diff)
    rep.check("span(e1-, e2-) is not closed under the product",
              table is not None and any(table[i][j][k] != 0 for i in range(2) for j in range(2)
                                        for k in range(2, 6)), "products stay in span(e1-, e2-)")
    env = pl.envelope_report(rep, conn, named, ("e1-", "e2-"))
    if env is None:
        return rep
    expect = [dict(named)[n] for n in ref.AFFR_ENVELOPE]
    ok = env.dim == 5 and _same_span(g.chart.field, env.basis, expect)
    rep.check("envelope of {e1-, e2-} is span(e1-, e2-, C3, C4, C5)", ok, f"dimension {env.dim}")
    v = lsa.check_associative(env.structure_constants())
    rep.check("envelope product is associative", v.holds, None if v else str(v.witness))
    m = lsa.matrix_envelope(lsa.affine_rep(A))
    rep.table("matrix route", f"matrix envelope of the affine representation: dimension {m.dim}")
    return rep


def generic_family(alpha: int) -> RunReport:
    """The one-parameter family e1e1 = alpha e1, e1e2 = e2 on aff(R)."""
    rep = RunReport(f"reproduce ex3_12_a{alpha}")
    g = builtin("aff_r")
    A = lsa.generic_aff_algebra(alpha)
    conn = christoffels_from_lsa(g, A)
    rep.table("Christoffel symbols", pl.christoffel_table(conn))
    if not pl.flatness_check(rep, conn):
        return rep
    named = _named(g.chart, ref.generic_fields(alpha))
    rep.table("fields", pl.fields_table(named))
    pl.affine_checks(rep, conn, named)
    table = pl.product_table_report(rep, conn, named)
    want = ref.generic_table(alpha)
    diff = _first_table_difference(table, want, ref.GENERIC_LABELS) if table else "table not closed"
    rep.check(f"all 16 products equal the reference table at alpha = {alpha}", diff is None, diff)
    env = pl.envelope_report(rep, conn, named, ("C1", "C2"))
    if env is None:
        return rep
    basis = ("C1", "C2") if alpha == 1 else ("C1", "C2", "C3")
    expect = [dict(named)[n] for n in basis]
    ok = env.dim == len(basis) and _same_span(g.chart.field, env.basis, expect)
    rep.check(f"envelope of {{C1, C2}} has basis ({', '.join(basis)})", ok, f"dimension {env.dim}")
    return rep


def general_linear_group(n: int = 2) -> RunReport:
    """Composition connection on GL(n): mixed products and the full envelope."""
    rep = RunReport("reproduce ex3_13")
    g = builtin(f"gl({n})")
    A = lsa.matrix_unit_algebra(n)
    conn = christoffels_from_lsa(g, A)
    rep.table("Christoffel symbols", pl.christoffel_table(conn))
    v = verify_left_invariance(g, conn, A)
    rep.check("left-invariant products match composition", v.holds, None if v else str(v.witness))
    if not pl.flatness_check(rep, conn):
        return rep
    mixed = mixed_products_gl(n, conn)
    rows = [(f"E{m.p + 1}{m.q + 1}+", f"E{m.r + 1}{m.s + 1}-", str(m.computed), "yes" if m.matches else "NO")
            for m in mixed]
    rep.table("mixed products D_{E_pq+} E_rs-", grid(("left", "right", "product", "closed form"), rows))
    bad = [f"({m.p + 1}{m.q + 1},{m.r + 1}{m.s + 1})" for m in mixed if not m.matches]
    rep.check(f"all {len(mixed)} mixed products equal x_sp d/dx_rq", not bad, ", ".join(bad) or None)
    gens = list(g.left_frame) + list(g.right_frame)
    labels = [f"E{r + 1}{s + 1}+" for r in range(n) for s in range(n)] + \
             [f"E{r + 1}{s + 1}-" for r in range(n) for s in range(n)]
    env = envelope_fields(conn, gens, cap=n ** 4, labels=labels)
    rep.table("envelope of left and right invariant fields",
              grid(("#", "element"), [(str(k + 1), lab) for k, lab in enumerate(env.labels)]))
    rep.check(f"envelope dimension is n^4 = {n ** 4}", env.dim == n ** 4, f"dimension {env.dim}")
    return rep


def two_punctures() -> RunReport:
    """Rank of the theta-evaluation map on the plane minus two points and on Aff(R)_0."""
    rep = RunReport("reproduce ex2_7")
    chart = Chart(("x", "y"), ("x^2 + y^2", "x^2 + (y - 1)^2"))
    conn = Connection.flat(chart)
    named = [("X1", chart.field_from(["x", "0"])), ("X2", chart.field_from(["0", "x"]))]
    rep.table("fields", pl.fields_table(named))
    pl.affine_checks(rep, conn, named)
    fb = FrameBundleChart(chart)
    fields = [f for _, f in named]
    frames = ((1, 0, 0, 1), (2, 1, -1, 3))
    samples = ((1, 0), (-2, 3), (1, 1), (0, 2), (0, -1), (0, Fraction(1, 2)))
    rows, bad = [], []
    for base in samples:
        for fr in frames:
            u = tuple(Fraction(v) for v in base + fr)
            r = orbit_map_rank(fb, conn, fields, u)
            expected = 2 if u[0] != 0 else 0
            if r != expected:
                bad.append(str(u))
            rows.append(("(" + ", ".join(pl.fmt_q(v) for v in u) + ")", str(r)))
    rep.table("rank at sample frames", grid(("bundle point", "rank"), rows))
    rep.check("rank is 2 exactly when x != 0 (0 on the line x = 0)", not bad, ", ".join(bad) or None)
    g = builtin("aff_r")
    gconn = christoffels_from_lsa(g, lsa.eq14_algebra())
    gfb = FrameBundleChart(g.chart)
    rows, bad = [], []
    for base in ((1, 0), (2, -3), (-1, 5)):
        for fr in frames:
            u = tuple(Fraction(v) for v in base + fr)
            r = orbit_map_rank(gfb, gconn, list(g.right_frame), u)
            if r != 2:
                bad.append(str(u))
            rows.append(("(" + ", ".join(pl.fmt_q(v) for v in u) + ")", str(r)))
    rep.table("right-invariant fields on Aff(R)_0", grid(("bundle point", "rank"), rows))
    rep.check("rank 2 at every sampled frame of the group", not bad, ", ".join(bad) or None)
    return rep


EXAMPLES = {
    "ex2_7": two_punctures,
    "ex3_8": punctured_plane,
    "ex3_9": affine_line_group,
    "ex3_12_a1": lambda: generic_family(1),
    "ex3_12_a2": lambda: generic_family(2),
    "ex3_12_a3": lambda: generic_family(3),
    "ex3_13": general_linear_group,
}


def golden_dir() -> Path:
    return Path(str(resources.files("flatlab") / "golden"))


def golden_path(example_id: str) -> Path:
    return golden_dir() / f"{example_id}.txt"


def run(example_id: str) -> RunReport:
    try:
        fn = EXAMPLES[example_id]
    except KeyError:
        raise KeyError(f"unknown example {example_id!r}; choose from {', '.join(EXAMPLES)}") from None
    return fn()


def compare_golden(example_id: str, text: str) -> None:
    path = golden_path(example_id)
    want = path.read_text() if path.exists() else ""
    if want != text:
        diff = "".join(difflib.unified_diff(want.splitlines(True), text.splitlines(True),
                                            f"golden/{example_id}.txt", "current"))
        raise GoldenMismatch(example_id, diff or "golden file missing")


def write_golden(example_id: str, text: str) -> Path:
    path = golden_path(example_id)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path

