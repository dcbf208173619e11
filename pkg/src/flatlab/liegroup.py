"""Lie groups presented by a chart with left and right invariant frames."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import exactmath as em
from .connection import Chart, Connection, VectorField, covariant_derivative
from .errors import SingularFrame, SingularMatrix, UnknownName
from .lsa import StructureConstants
from .verdict import Verdict


@dataclass(frozen=True, eq=False)
class GroupChart:
    name: str
    chart: Chart
    identity: tuple
    left_frame: tuple
    right_frame: tuple

    def __post_init__(self):
        n = self.chart.dim
        object.__setattr__(self, "identity", tuple(Fraction(v) for v in self.identity))
        object.__setattr__(self, "left_frame", tuple(self.left_frame))
        object.__setattr__(self, "right_frame", tuple(self.right_frame))
        if len(self.identity) != n:
            raise ValueError("identity point has the wrong dimension")
        for label, frame in (("left", self.left_frame), ("right", self.right_frame)):
            if len(frame) != n:
                raise ValueError(f"{label} frame needs {n} fields")
            if frame_matrix(frame).det() == 0:
                raise SingularFrame(f"{label} frame is not generically independent")
        for i, (a, b) in enumerate(zip(self.left_frame, self.right_frame)):
            if a.at(self.identity) != b.at(self.identity):
                raise ValueError(f"left and right frames differ at the identity (field {i})")

    @property
    def dim(self):
        return self.chart.dim


def frame_matrix(frame) -> em.ExactMatrix:
    """Columns are the frame fields: M[k][a] = component k of e_a."""
    n = len(frame)
    return em.ExactMatrix([[frame[a].components[k] for a in range(n)] for k in range(n)])


def frame_coordinates(frame, X: VectorField, inverse=None):
    """Coefficients of X in the frame (rational functions)."""
    Minv = inverse if inverse is not None else frame_matrix(frame).inverse()
    col = em.ExactMatrix.column(X.components)
    return (Minv @ col).col(0)


def _abelian(n):
    names = ("x", "y", "z") if n <= 3 else tuple(f"x{i + 1}" for i in range(n))
    chart = Chart(names[:n])
    frame = tuple(chart.coordinate_field(i) for i in range(n))
    return GroupChart(f"abelian({n})", chart, (0,) * n, frame, frame)


def _aff_r():
    chart = Chart(("x", "y"), ("x",))
    left = (chart.field_from(["x", "0"]), chart.field_from(["0", "x"]))
    right = (chart.field_from(["x", "y"]), chart.field_from(["0", "1"]))
    return GroupChart("aff_r", chart, (1, 0), left, right)


def gl_variables(n):
    return tuple(f"x{i + 1}{j + 1}" for i in range(n) for j in range(n))


def _gl(n):
    names = gl_variables(n)
    idx = {(i, j): i * n + j for i in range(n) for j in range(n)}
    chart0 = Chart(names)
    X = em.ExactMatrix([[chart0.var(idx[(i, j)]) for j in range(n)] for i in range(n)])
    det = X.det()
    chart = Chart(names, (det,))
    K = chart.field
    left, right = [], []
    for r, s in itertools.product(range(n), repeat=2):
        comps = [K.zero] * (n * n)
        for i in range(n):
            comps[idx[(i, s)]] += chart.var(idx[(i, r)])
        left.append(VectorField(chart, tuple(comps)))
        comps = [K.zero] * (n * n)
        for i in range(n):
            comps[idx[(r, i)]] += chart.var(idx[(s, i)])
        right.append(VectorField(chart, tuple(comps)))
    ident = tuple(1 if i == j else 0 for i in range(n) for j in range(n))
    return GroupChart(f"gl({n})", chart, ident, tuple(left), tuple(right))


def builtin(name: str) -> GroupChart:
    """``aff_r``, ``abelian(n)`` or ``gl(n)``."""
    key = name.strip().lower().replace(" ", "")
    if key in ("aff_r", "affr", "aff(r)"):
        return _aff_r()
    for prefix, make in (("abelian", _abelian), ("gl", _gl)):
        if key.startswith(prefix + "(") and key.endswith(")"):
            try:
                n = int(key[len(prefix) + 1:-1])
            except ValueError:
                break
            if n < 1:
                break
            return make(n)
    raise UnknownName(f"unknown group {name!r}; built-ins are aff_r, abelian(n), gl(n)")


def christoffels_from_lsa(g: GroupChart, A: StructureConstants) -> Connection:
    """The connection with nabla_{e_a+} e_b+ = sum_c A.c[a][b][c] e_c+.

    Writes d_j = sum_b psi[b][j] e_b with psi the inverse frame matrix and
    expands nabla_{d_i} d_j by the Leibniz rule.
    """
    n = g.dim
    if A.dim != n:
        raise ValueError(f"algebra dimension {A.dim} differs from group dimension {n}")
    frame = g.left_frame
    Phi = frame_matrix(frame)
    try:
        psi = Phi.inverse()
    except SingularMatrix:
        raise SingularFrame("left frame matrix is not invertible") from None
    K = g.chart.field
    gens = K.gens
    # products[a][b] = nabla_{e_a} e_b as a field
    products = [[None] * n for _ in range(n)]
    for a, b in itertools.product(range(n), repeat=2):
        acc = VectorField(g.chart, (K.zero,) * n)
        for c in range(n):
            if A.c[a][b][c]:
                acc = acc + A.c[a][b][c] * frame[c]
        products[a][b] = acc
    gamma = [[[K.zero] * n for _ in range(n)] for _ in range(n)]
    for i, j in itertools.product(range(n), repeat=2):
        acc = VectorField(g.chart, (K.zero,) * n)
        for b in range(n):
            pbj = psi[b, j]
            d = pbj.diff(gens[i])
            if d != 0:
                acc = acc + d * frame[b]
            if pbj == 0:
                continue
            for a in range(n):
                pai = psi[a, i]
                if pai != 0:
                    acc = acc + (pai * pbj) * products[a][b]
        for k in range(n):
            gamma[k][i][j] = acc.components[k]
    return Connection(g.chart, gamma)


def frame_structure_constants(frame):
    """Constants of [e_a, e_b] in the frame; ``None`` if some bracket has non-constant coordinates."""
    from .connection import lie_bracket

    n = len(frame)
    psi = frame_matrix(frame).inverse()
    b = [[None] * n for _ in range(n)]
    for i, j in itertools.product(range(n), repeat=2):
        coords = frame_coordinates(frame, lie_bracket(frame[i], frame[j]), psi)
        if not all(em.is_constant(c) for c in coords):
            return None
        b[i][j] = tuple(em.constant_value(c) for c in coords)
    return b


def verify_left_invariance(g: GroupChart, conn: Connection, A: StructureConstants) -> Verdict:
    """nabla_{e_a+} e_b+ has constant frame coordinates A.c[a][b] for all a, b."""
    n = g.dim
    psi = frame_matrix(g.left_frame).inverse()
    for a, b in itertools.product(range(n), repeat=2):
        prod = covariant_derivative(conn, g.left_frame[a], g.left_frame[b])
        coords = frame_coordinates(g.left_frame, prod, psi)
        expected = A.c[a][b]
        if any(em.is_constant(c) is False or em.constant_value(c) != e for c, e in zip(coords, expected)):
            return Verdict.fail((a, b), tuple(coords))
    return Verdict.ok()


@dataclass(frozen=True)
class MixedProduct:
    p: int
    q: int
    r: int
    s: int
    computed: VectorField
    expected: VectorField

    @property
    def matches(self):
        return self.computed == self.expected


def mixed_products_gl(n: int = 2, conn: Connection | None = None):
    """All D_{E+_pq} E-_rs on gl(n), each compared with x_sp d/dx_rq."""
    from .lsa import matrix_unit_algebra

    g = builtin(f"gl({n})")
    if conn is None:
        conn = christoffels_from_lsa(g, matrix_unit_algebra(n))
    K = g.chart.field
    idx = {(i, j): i * n + j for i in range(n) for j in range(n)}
    out = []
    for (p, q), (r, s) in itertools.product(idx, repeat=2):
        computed = covariant_derivative(conn, g.left_frame[idx[(p, q)]], g.right_frame[idx[(r, s)]])
        comps = [K.zero] * (n * n)
        comps[idx[(r, q)]] = g.chart.var(idx[(s, p)])
        out.append(MixedProduct(p, q, r, s, computed, VectorField(g.chart, tuple(comps))))
    return out


def mixed_products_gl2():
    return mixed_products_gl(2)
