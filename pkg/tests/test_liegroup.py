from fractions import Fraction

import pytest
import sympy

from flatlab import io, liegroup as lg, lsa
from flatlab.connection import Chart
from flatlab.errors import SingularFrame, UnknownName

import oracles


@pytest.mark.parametrize("name, dim", [("aff_r", 2), ("Aff(R)", 2), ("abelian(3)", 3),
                                       ("gl(2)", 4), (" GL(1) ", 1)])
def test_builtin_names(name, dim):
    assert lg.builtin(name).dim == dim


@pytest.mark.parametrize("name", ["so(3)", "gl(0)", "gl(x)", "abelian"])
def test_unknown_group(name):
    with pytest.raises(UnknownName):
        lg.builtin(name)


def test_singular_frame_rejected():
    ch = Chart(("x", "y"))
    f = ch.field_from(["1", "y"])
    with pytest.raises(SingularFrame):
        lg.GroupChart("bad", ch, (0, 0), (f, ch.field_from(["2", "2*y"])), (f, f))


def test_frames_must_agree_at_identity():
    ch = Chart(("x", "y"))
    left = (ch.coordinate_field(0), ch.coordinate_field(1))
    right = (ch.field_from(["1", "0"]), ch.field_from(["0", "2"]))
    with pytest.raises(ValueError):
        lg.GroupChart("bad", ch, (0, 0), left, right)


def test_christoffels_of_eq14_on_affr():
    g = lg.builtin("aff_r")
    conn = lg.christoffels_from_lsa(g, lsa.eq14_algebra())
    want = io.connection_from_json(io.load(io.data_path("affr.json")))
    assert conn.gamma == want.gamma
    assert lg.verify_left_invariance(g, conn, lsa.eq14_algebra()).holds
    other = lsa.generic_aff_algebra(2)
    assert not lg.verify_left_invariance(g, conn, other).holds


def test_left_invariance_against_sympy():
    # recompute nabla_{e_a} e_b with plain sympy and read off frame coordinates
    g = lg.builtin("aff_r")
    A = lsa.eq14_algebra()
    conn = lg.christoffels_from_lsa(g, A)
    xs = sympy.symbols("x y")
    G = oracles.gamma_exprs(conn)
    frame = [oracles.field_exprs(f) for f in g.left_frame]
    M = sympy.Matrix(frame).T
    for a in range(2):
        for b in range(2):
            prod = oracles.nabla(G, xs, frame[a], frame[b])
            coords = [sympy.cancel(c) for c in M.solve(sympy.Matrix(prod))]
            assert coords == [sympy.Rational(v.numerator, v.denominator) for v in A.c[a][b]]


def test_abelian_connection_is_trivial():
    g = lg.builtin("abelian(2)")
    conn = lg.christoffels_from_lsa(g, lsa.StructureConstants.from_products(2, {}))
    assert all(c == 0 for plane in conn.gamma for row in plane for c in row)


def test_frame_structure_constants():
    g = lg.builtin("aff_r")
    b = lg.frame_structure_constants(g.left_frame)
    assert b[0][1] == (Fraction(0), Fraction(1)) and b[1][0] == (Fraction(0), Fraction(-1))
    # right-invariant fields bracket with the opposite sign
    assert lg.frame_structure_constants(g.right_frame)[0][1] == (Fraction(0), Fraction(-1))
    ch = g.chart
    assert lg.frame_structure_constants((ch.coordinate_field(0), ch.field_from(["0", "x"]))) is None


def test_frame_coordinates():
    g = lg.builtin("aff_r")
    X = g.chart.field_from(["x", "y"])
    coords = lg.frame_coordinates(g.left_frame, X)
    assert [str(c) for c in coords] == ["1", "y/x"]


def test_mixed_products_on_gl2():
    out = lg.mixed_products_gl2()
    assert len(out) == 16 and all(m.matches for m in out)


def test_mismatched_dimension():
    with pytest.raises(ValueError):
        lg.christoffels_from_lsa(lg.builtin("aff_r"), lsa.matrix_unit_algebra(2))
