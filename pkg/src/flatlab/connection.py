"""Linear connections on coordinate charts and the product X.Y = nabla_X Y.

Index conventions: ``gamma[k][i][j]`` is the coefficient of d_k in
nabla_{d_i} d_j, so (nabla_X Y)^k = X^i d_i Y^k + gamma[k][i][j] X^i Y^j.
Curvature is stored as ``R[l][i][j][k]`` with
R(d_i, d_j) d_k = nabla_i nabla_j d_k - nabla_j nabla_i d_k = R[l][i][j][k] d_l.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from sympy.polys.fields import FracElement

from . import exactmath as em
from .errors import (
    DependentFields,
    MixedCharts,
    NonPolynomialConnection,
    NotFlat,
    NotInfinitesimalAffine,
    NotValidOnChart,
)
from .lsa import ClosureResult, closure
from .verdict import Verdict


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("FLATLAB_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """``map`` that may run on worker threads but keeps input order."""
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class Chart:
    variables: tuple
    nonvanishing: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(str(v) for v in self.variables))
        K = em.rational_field(self.variables)
        polys = []
        for p in self.nonvanishing:
            f = em.parse_expr(p, K) if isinstance(p, str) else em.const(K, p)
            if f.field != K:
                raise MixedCharts("nonvanishing polynomial lives on another chart")
            if not em.is_polynomial(f):
                raise ValueError(f"nonvanishing entry {em.fmt(f)} is not a polynomial")
            if f == 0:
                raise ValueError("the zero polynomial cannot be declared nonvanishing")
            polys.append(f)
        object.__setattr__(self, "nonvanishing", tuple(polys))

    @property
    def field(self):
        return em.rational_field(self.variables)

    @property
    def dim(self):
        return len(self.variables)

    def var(self, i):
        return self.field.gens[i]

    def parse(self, text, source=None):
        return em.parse_expr(text, self.field, source)

    def const(self, value):
        return em.const(self.field, value)

    @property
    def zero(self):
        return self.field.zero

    def is_valid(self, f) -> bool:
        """True iff the denominator divides a product of declared nonvanishing polynomials."""
        d = f.denom
        if d.is_ground:
            return True
        for p in self.nonvanishing:
            pn = p.numer
            while not d.is_ground:
                g = d.gcd(pn)
                if g.is_ground:
                    break
                d = d.exquo(g)
        return d.is_ground

    def check(self, f, what="expression"):
        if not self.is_valid(f):
            raise NotValidOnChart(
                f"{what} {em.fmt(f)} has a denominator not covered by the nonvanishing set "
                f"{[em.fmt(p) for p in self.nonvanishing]}")
        return f

    def coordinate_field(self, i) -> "VectorField":
        K = self.field
        return VectorField(self, tuple(K.one if j == i else K.zero for j in range(self.dim)))

    def field_from(self, components, check=True) -> "VectorField":
        comps = tuple(self.parse(c) if isinstance(c, str) else em.const(self.field, c) for c in components)
        if len(comps) != self.dim:
            raise ValueError(f"expected {self.dim} components, got {len(comps)}")
        if check:
            for c in comps:
                self.check(c, "component")
        return VectorField(self, comps)

    def point_ok(self, point) -> bool:
        return all(em.evaluate(p, point) != 0 for p in self.nonvanishing)


@dataclass(frozen=True, eq=False)
class VectorField:
    chart: Chart
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.chart.dim:
            raise ValueError("component count differs from chart dimension")

    def _same(self, other):
        if self.chart.variables != other.chart.variables:
            raise MixedCharts(f"fields on {self.chart.variables} and {other.chart.variables}")

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart.variables == other.chart.variables and all(
            a == b for a, b in zip(self.components, other.components))

    def __hash__(self):
        return hash((self.chart.variables, self.components))

    def __add__(self, other):
        self._same(other)
        return VectorField(self.chart, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        self._same(other)
        return VectorField(self.chart, tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self):
        return VectorField(self.chart, tuple(-a for a in self.components))

    def __rmul__(self, s):
        if not isinstance(s, FracElement):
            s = em.const(self.chart.field, s)
        return VectorField(self.chart, tuple(s * a for a in self.components))

    def is_zero(self):
        return all(c == 0 for c in self.components)

    def apply(self, f):
        """Directional derivative X(f)."""
        K = self.chart.field
        acc = K.zero
        for i, xi in enumerate(self.components):
            if xi != 0:
                d = f.diff(K.gens[i])
                if d != 0:
                    acc += xi * d
        return acc

    def at(self, point):
        return tuple(em.evaluate(c, point) for c in self.components)

    def __str__(self):
        out = ""
        for name, c in zip(self.chart.variables, self.components):
            if c == 0:
                continue
            neg = em.is_constant(c) and em.constant_value(c) < 0
            mag = -c if neg else c
            s = em.fmt(mag)
            if len(mag.numer.terms()) > 1 and mag.denom.is_ground:
                s = f"({s})"
            term = f"d_{name}" if mag == 1 else f"{s}*d_{name}"
            if not out:
                out = ("-" if neg else "") + term
            else:
                out += (" - " if neg else " + ") + term
        return out or "0"

    def render(self):
        return "(" + ", ".join(em.fmt(c) for c in self.components) + ")"


@dataclass(frozen=True, eq=False)
class Connection:
    chart: Chart
    gamma: tuple  # gamma[k][i][j]

    def __post_init__(self):
        n = self.chart.dim
        K = self.chart.field
        g = tuple(tuple(tuple(em.const(K, self.gamma[k][i][j]) for j in range(n))
                        for i in range(n)) for k in range(n))
        for k, i, j in itertools.product(range(n), repeat=3):
            if g[k][i][j].field != K:
                raise MixedCharts("Christoffel symbol lives on another chart")
            self.chart.check(g[k][i][j], f"Gamma^{k}_{i}{j}")
        object.__setattr__(self, "gamma", g)

    @classmethod
    def flat(cls, chart):
        n = chart.dim
        return cls(chart, [[[chart.zero] * n for _ in range(n)] for _ in range(n)])

    @classmethod
    def from_entries(cls, chart, entries):
        """Build from ``{(k, i, j): value}``; unspecified symbols are zero."""
        n = chart.dim
        g = [[[chart.zero] * n for _ in range(n)] for _ in range(n)]
        for (k, i, j), v in entries.items():
            g[k][i][j] = chart.parse(v) if isinstance(v, str) else em.const(chart.field, v)
        return cls(chart, g)

    @property
    def dim(self):
        return self.chart.dim

    def is_polynomial(self):
        return all(em.is_polynomial(c) for a in self.gamma for b in a for c in b)

    def nabla_coord(self, i, j) -> VectorField:
        """nabla_{d_i} d_j."""
        return VectorField(self.chart, tuple(self.gamma[k][i][j] for k in range(self.dim)))


def _check_chart(conn, *fields):
    for f in fields:
        if f.chart.variables != conn.chart.variables:
            raise MixedCharts(f"field on {f.chart.variables}, connection on {conn.chart.variables}")


def covariant_derivative(conn: Connection, X: VectorField, Y: VectorField) -> VectorField:
    _check_chart(conn, X, Y)
    n = conn.dim
    K = conn.chart.field
    gens = K.gens
    out = []
    xs = X.components
    ys = Y.components
    active = [i for i in range(n) if xs[i] != 0]
    for k in range(n):
        acc = K.zero
        yk = ys[k]
        if yk != 0:
            for i in active:
                d = yk.diff(gens[i])
                if d != 0:
                    acc += xs[i] * d
        gk = conn.gamma[k]
        for i in active:
            gki = gk[i]
            for j in range(n):
                if ys[j] != 0 and gki[j] != 0:
                    acc += gki[j] * xs[i] * ys[j]
        out.append(acc)
    return VectorField(X.chart, tuple(out))


def torsion(conn: Connection):
    n = conn.dim
    g = conn.gamma
    return tuple(tuple(tuple(g[k][i][j] - g[k][j][i] for j in range(n)) for i in range(n))
                 for k in range(n))


def curvature(conn: Connection):
    n = conn.dim
    g = conn.gamma
    gens = conn.chart.field.gens
    K = conn.chart.field
    R = [[[[K.zero] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for l, i, j, k in itertools.product(range(n), repeat=4):
        v = g[l][j][k].diff(gens[i]) - g[l][i][k].diff(gens[j])
        for m in range(n):
            v += g[l][i][m] * g[m][j][k] - g[l][j][m] * g[m][i][k]
        R[l][i][j][k] = v
    return tuple(tuple(tuple(tuple(c) for c in b) for b in a) for a in R)


def is_flat_affine(conn: Connection) -> Verdict:
    """Both torsion and curvature vanish identically.

    The witness is ``("torsion", (i, j), T(d_i, d_j))`` or
    ``("curvature", (i, j, k), R(d_i, d_j) d_k)`` for the first nonzero value.
    """
    n = conn.dim
    T = torsion(conn)
    for i, j in itertools.product(range(n), repeat=2):
        vec = tuple(T[k][i][j] for k in range(n))
        if any(v != 0 for v in vec):
            return Verdict.fail(("torsion", (i, j)), VectorField(conn.chart, vec))
    R = curvature(conn)
    for i, j, k in itertools.product(range(n), repeat=3):
        vec = tuple(R[l][i][j][k] for l in range(n))
        if any(v != 0 for v in vec):
            return Verdict.fail(("curvature", (i, j, k)), VectorField(conn.chart, vec))
    return Verdict.ok()


def describe_flatness_witness(conn, verdict) -> str:
    kind, idx = verdict.witness
    names = conn.chart.variables
    if kind == "torsion":
        i, j = idx
        return f"T(d_{names[i]}, d_{names[j]}) = {verdict.detail}"
    i, j, k = idx
    return f"R(d_{names[i]}, d_{names[j]})d_{names[k]} = {verdict.detail}"


def require_flat(conn):
    v = is_flat_affine(conn)
    if not v:
        raise NotFlat(f"connection is not flat affine: {describe_flatness_witness(conn, v)}", v)
    return v


def affine_defect(conn: Connection, X: VectorField, i: int, j: int) -> VectorField:
    """nabla_{nabla_{d_i} d_j} X - nabla_{d_i} nabla_{d_j} X."""
    lhs = covariant_derivative(conn, conn.nabla_coord(i, j), X)
    inner = covariant_derivative(conn, conn.chart.coordinate_field(j), X)
    rhs = covariant_derivative(conn, conn.chart.coordinate_field(i), inner)
    return lhs - rhs


def _affine_check(conn, X) -> Verdict:
    n = conn.dim
    for i, j in itertools.product(range(n), repeat=2):
        d = affine_defect(conn, X, i, j)
        if not d.is_zero():
            return Verdict.fail((i, j), d)
    return Verdict.ok()


def is_infinitesimal_affine(conn: Connection, X: VectorField) -> Verdict:
    """Check nabla_{nabla_Y Z} X = nabla_Y nabla_Z X on coordinate pairs (Y, Z) = (d_i, d_j).

    The defect is tensorial in Y and Z, so coordinate pairs suffice.
    """
    _check_chart(conn, X)
    require_flat(conn)
    return _affine_check(conn, X)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    X._same(Y)
    return VectorField(X.chart, tuple(X.apply(yk) - Y.apply(xk)
                                      for xk, yk in zip(X.components, Y.components)))


commutator_field = lie_bracket


def check_bracket_compat(conn: Connection, X: VectorField, Y: VectorField) -> Verdict:
    """nabla_X Y - nabla_Y X equals the Lie bracket [X, Y]."""
    lhs = covariant_derivative(conn, X, Y) - covariant_derivative(conn, Y, X)
    rhs = lie_bracket(X, Y)
    diff = lhs - rhs
    if diff.is_zero():
        return Verdict.ok()
    return Verdict.fail("bracket", diff)


@dataclass(frozen=True)
class ProductTable:
    closed: bool
    fields: tuple
    table: tuple | None = None  # table[i][j] = coordinates of f_i . f_j
    witness: tuple | None = None  # (i, j, product) of the first escaping product

    def entry(self, i, j):
        return self.table[i][j]


def product_table(conn: Connection, fields: Sequence[VectorField]) -> ProductTable:
    fields = list(fields)
    _check_chart(conn, *fields)
    require_flat(conn)
    span = em.FieldSpan(conn.chart.field)
    for idx, f in enumerate(fields):
        if not span.add(f.components):
            raise DependentFields(f"field #{idx} {f} is a combination of the earlier ones")
    n = len(fields)
    pairs = list(itertools.product(range(n), repeat=2))
    prods = ordered_map(lambda ij: covariant_derivative(conn, fields[ij[0]], fields[ij[1]]), pairs)
    table = [[None] * n for _ in range(n)]
    for (i, j), p in zip(pairs, prods):
        c = span.coordinates(p.components)
        if c is None:
            return ProductTable(False, tuple(fields), None, (i, j, p))
        table[i][j] = c
    return ProductTable(True, tuple(fields), tuple(tuple(r) for r in table))


class _FieldSpanAdapter:
    def __init__(self, K):
        self._span = em.FieldSpan(K)

    def add(self, f):
        return self._span.add(f.components)

    def coordinates(self, f):
        return self._span.coordinates(f.components)


def envelope_fields(conn: Connection, generators: Sequence[VectorField], cap: int | None = None,
                    labels=None) -> ClosureResult:
    """Smallest nabla-product-closed space containing the generators."""
    generators = list(generators)
    _check_chart(conn, *generators)
    require_flat(conn)
    for idx, g in enumerate(generators):
        v = _affine_check(conn, g)
        if not v:
            raise NotInfinitesimalAffine(
                f"generator #{idx} {g} is not an infinitesimal affine transformation "
                f"(defect at coordinate pair {v.witness})", idx)
    n = conn.dim
    if cap is None:
        cap = n * n + n
    K = conn.chart.field
    return closure(generators, lambda a, b: covariant_derivative(conn, a, b),
                   lambda: _FieldSpanAdapter(K), cap, labels=labels, pmap=ordered_map)


def _monomials(n, degree):
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            m = [0] * n
            for c in combo:
                m[c] += 1
            out.append(tuple(m))
    return sorted(set(out), key=lambda m: (sum(m), tuple(-e for e in m)))


def solve_polynomial_affine_fields(conn: Connection, degree: int) -> list[VectorField]:
    """Basis of polynomial fields of degree <= ``degree`` satisfying the affine criterion.

    The criterion is linear in X, so it is evaluated on every monomial
    field x^m d_k and the resulting coefficient vectors become the columns
    of a Q-matrix whose nullspace is the solution space.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if not conn.is_polynomial():
        raise NonPolynomialConnection("the polynomial ansatz needs polynomial Christoffel symbols")
    require_flat(conn)
    n = conn.dim
    K = conn.chart.field
    gens = K.gens
    unknowns = []
    for k in range(n):
        for m in _monomials(n, degree):
            mono = K.one
            for g, e in zip(gens, m):
                if e:
                    mono *= g**e
            unknowns.append(VectorField(conn.chart, tuple(mono if c == k else K.zero for c in range(n))))
    pairs = list(itertools.product(range(n), repeat=2))

    def column(X):
        vec = {}
        for i, j in pairs:
            d = affine_defect(conn, X, i, j)
            for k, c in enumerate(d.components):
                for monom, coeff in c.numer.terms():
                    vec[(i, j, k, monom)] = em.to_fraction(coeff) / em.to_fraction(c.denom.LC)
        return vec

    cols = ordered_map(column, unknowns)
    keys = sorted({key for col in cols for key in col})
    if not keys:
        return unknowns
    M = em.ExactMatrix([[col.get(key, Fraction(0)) for col in cols] for key in keys])
    _, null = em.rank_and_nullspace(M)
    basis = []
    for vec in null:
        comps = [K.zero] * n
        for coeff, X in zip(vec, unknowns):
            if coeff != 0:
                comps = [a + em.const(K, coeff) * b for a, b in zip(comps, X.components)]
        basis.append(VectorField(conn.chart, tuple(comps)))
    return basis
