import math
from fractions import Fraction

import numpy as np
import pytest

from flatlab import lsa
from flatlab.exactmath import ExactMatrix
from flatlab.errors import CapExceeded, JacobiFailure, NotAssociative, NotLeftSymmetric

from oracles import expm_taylor

F = Fraction


def perturbed():
    # e2e2 = e1 + e2 instead of e1
    return lsa.StructureConstants.from_products(2, {(0, 0): [2, 0], (0, 1): [0, 1], (1, 1): [1, 1]})


def test_eq14_is_left_symmetric_not_associative():
    A = lsa.eq14_algebra()
    assert lsa.check_left_symmetric(A).holds
    v = lsa.check_associative(A)
    assert not v.holds
    bad = dict(v.violations)
    # (e2 e2) e1 - e2 (e2 e1) = e1 e1 - 0 = 2 e1
    assert bad[(1, 1, 0)] == (F(2), F(0))
    assert v.witness == (0, 0, 1)


def test_perturbation_first_violation():
    # assoc(e1,e2,e2) = -e1 and assoc(e2,e1,e2) = -(e1 + e2), difference e2
    v = lsa.check_left_symmetric(perturbed())
    assert not v.holds
    assert v.witness == (0, 1, 1)
    assert v.detail == (F(0), F(1))


def test_affine_rep_values():
    e1, e2 = lsa.affine_rep(lsa.eq14_algebra())
    assert e1.matrix == ExactMatrix([[2, 0, 1], [0, 1, 0], [0, 0, 0]])
    assert e2.matrix == ExactMatrix([[0, 1, 0], [0, 0, 1], [0, 0, 0]])
    assert e1.translation == (F(1), F(0)) and e1.linear == ExactMatrix([[2, 0], [0, 1]])
    # [e1, e2] = e1e2 - e2e1 = e2
    assert e1.bracket(e2) == e2


def test_affine_rep_requires_left_symmetry():
    with pytest.raises(NotLeftSymmetric):
        lsa.affine_rep(perturbed())
    with pytest.raises(ValueError):
        lsa.AffineRepElement([[1, 0], [1, 0]])


@pytest.mark.parametrize("A", [lsa.eq14_algebra(), lsa.generic_aff_algebra(3),
                               lsa.matrix_unit_algebra(2)])
def test_eta_is_homomorphism(A):
    reps = lsa.affine_rep(A)
    assert lsa.check_lie_homomorphism(reps, lsa.commutator_algebra(A)).holds


def test_commutator_of_eq14():
    L = lsa.commutator_algebra(lsa.eq14_algebra())
    assert L.bracket((1, 0), (0, 1)) == (F(0), F(1))


def test_jacobi_failure_is_reported():
    b = [[[0] * 3 for _ in range(3)] for _ in range(3)]

    def put(i, j, k):
        b[i][j][k], b[j][i][k] = 1, -1

    put(0, 1, 2)  # [e1,e2] = e3
    put(1, 2, 0)  # [e2,e3] = e1
    put(2, 0, 2)  # [e3,e1] = e3
    with pytest.raises(JacobiFailure) as info:
        lsa.LieStructure(3, b)
    assert info.value.triple == (0, 1, 2)
    assert info.value.residual == (F(-1), F(0), F(0))


def test_labels_and_formatting():
    A = lsa.eq14_algebra()
    assert A.format_product(A.c[0][0]) == "2e1"
    assert lsa.format_combination((F(1), F(-1, 2)), ("a", "b")) == "a - (1/2)b"
    assert lsa.format_combination((F(-2), F(0)), ("a", "b")) == "-2a"
    with pytest.raises(ValueError):
        lsa.StructureConstants(2, A.c, ("e", "e"))


def test_change_basis_preserves_left_symmetry_and_round_trips():
    A = lsa.eq14_algebra()
    P = ExactMatrix([[1, 1], [0, 2]])
    B = A.change_basis(P)
    assert lsa.check_left_symmetric(B).holds
    assert B.change_basis(P.inverse()).c == A.c
    assert A.change_basis(ExactMatrix.identity(2)).c == A.c


def test_matrix_envelope_of_eq14():
    res = lsa.matrix_envelope(lsa.affine_rep(lsa.eq14_algebra()))
    assert res.dim == 5
    assert res.trace[:2] == [("generator", 0), ("generator", 1)]
    assert lsa.check_associative(res.structure_constants()).holds
    with pytest.raises(CapExceeded):
        lsa.matrix_envelope(lsa.affine_rep(lsa.eq14_algebra()), cap=3)


def test_matrix_envelope_of_full_matrix_units():
    E12 = ExactMatrix([[0, 1], [0, 0]])
    E21 = ExactMatrix([[0, 0], [1, 0]])
    assert lsa.matrix_envelope([E12, E21]).dim == 4
    assert lsa.matrix_envelope([E12]).dim == 1


def test_adjoin_unit():
    res = lsa.matrix_envelope(lsa.affine_rep(lsa.eq14_algebra()))
    A = res.structure_constants()
    U = lsa.adjoin_unit(A, require_associative=True)
    assert U.dim == 6 and U.basis_labels[-1] == "1"
    assert lsa.check_associative(U).holds
    e = U.basis(5)
    for i in range(6):
        assert U.mul(e, U.basis(i)) == U.basis(i) == U.mul(U.basis(i), e)
    with pytest.raises(NotAssociative):
        lsa.adjoin_unit(lsa.eq14_algebra(), require_associative=True)


def test_expm_closed_form():
    eta1 = lsa.affine_rep(lsa.eq14_algebra())[0]
    got = lsa.matrix_exponential_numeric(eta1)
    e = math.e
    want = np.array([[e * e, 0, (e * e - 1) / 2], [0, e, 0], [0, 0, 1]])
    assert np.allclose(got, want, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("t", [-1.5, 0.25, 1.0])
def test_expm_against_taylor_series(t):
    for r in lsa.affine_rep(lsa.eq14_algebra()):
        rows = [[F(v) for v in row] for row in r.matrix.entries]
        got = lsa.matrix_exponential_numeric(r, t)
        assert np.allclose(got, np.array(expm_taylor(rows, F(t))), rtol=1e-12, atol=1e-12)


def test_orbit_sample_against_taylor_oracle():
    reps = lsa.affine_rep(lsa.eq14_algebra())
    grid = [(0.0, 0.0), (0.5, -0.25), (-1.0, 1.0)]
    pts = lsa.orbit_sample(reps, grid)
    assert pts[0] == (0.0, 0.0)
    for (t1, t2), p in zip(grid, pts):
        a = np.array(expm_taylor([list(r) for r in reps[0].matrix.entries], F(t1)))
        b = np.array(expm_taylor([list(r) for r in reps[1].matrix.entries], F(t2)))
        want = (a @ b) @ np.array([0, 0, 1.0])
        assert np.allclose(p, want[:2], rtol=1e-12, atol=1e-12)


def test_orbit_jacobian_numerically_identity():
    reps = lsa.affine_rep(lsa.eq14_algebra())
    h = 1e-6
    cols = []
    for i in range(2):
        plus = [0.0, 0.0]
        minus = [0.0, 0.0]
        plus[i], minus[i] = h, -h
        p, m = lsa.orbit_sample(reps, [tuple(plus), tuple(minus)])
        cols.append([(a - b) / (2 * h) for a, b in zip(p, m)])
    assert np.allclose(np.array(cols).T, np.eye(2), atol=1e-8)
    assert lsa.orbit_jacobian_at_origin(reps) == ExactMatrix.identity(2)


def test_uniform_grid():
    g = lsa.uniform_grid(21, 2)
    assert len(g) == 441 and g[0] == (-1.0, -1.0) and g[-1] == (1.0, 1.0)
    with pytest.raises(ValueError):
        lsa.uniform_grid(0, 2)


def test_matrix_unit_algebra_is_associative():
    A = lsa.matrix_unit_algebra(2)
    assert lsa.check_associative(A).holds
    assert A.basis_labels == ("E11", "E12", "E21", "E22")
    assert A.opposite().opposite().c == A.c
