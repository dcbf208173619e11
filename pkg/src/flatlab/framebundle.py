"""The linear frame bundle over a chart.

Bundle coordinates are the base variables followed by the frame entries
X11, X12, ..., Xnn where Xij is the i-th base coordinate of the j-th frame
vector.  Forms are evaluated on vector fields, never materialized;
two-forms use the convention d(alpha)(Z1, Z2) =
1/2 (Z1 alpha(Z2) - Z2 alpha(Z1) - alpha([Z1, Z2])).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from . import exactmath as em
from .connection import (
    Chart,
    Connection,
    VectorField,
    is_infinitesimal_affine,
    lie_bracket,
)
from .errors import InvalidPoint, MixedCharts, NotInfinitesimalAffine


def _embed(f, K):
    """Move a rational function into a field with more variables (same names)."""
    R = K.ring
    return K.new(f.numer.set_ring(R), f.denom.set_ring(R))


class FrameBundleChart:
    def __init__(self, base: Chart):
        self.base = base
        n = base.dim
        frame_vars = tuple(f"X{i + 1}{j + 1}" for i in range(n) for j in range(n))
        clash = set(frame_vars) & set(base.variables)
        if clash:
            raise ValueError(f"base variables collide with frame coordinates: {sorted(clash)}")
        self.frame_vars = frame_vars
        names = base.variables + frame_vars
        K0 = em.rational_field(names)
        X = em.ExactMatrix([[K0.gens[n + i * n + j] for j in range(n)] for i in range(n)])
        nonvanishing = tuple(_embed(p, K0) for p in base.nonvanishing) + (X.det(),)
        self.chart = Chart(names, nonvanishing)
        K = self.chart.field
        self.X = em.ExactMatrix([[K.gens[n + i * n + j] for j in range(n)] for i in range(n)])
        self.Xinv = self.X.inverse()

    @property
    def n(self):
        return self.base.dim

    @property
    def field(self):
        return self.chart.field

    def embed(self, f):
        if f.field == self.field:
            return f
        if em.field_variables(f.field) != self.base.variables:
            raise MixedCharts("function does not live on the base chart")
        return _embed(f, self.field)

    def make(self, base_components, frame_components) -> VectorField:
        """Bundle field from base components and an n x n frame part."""
        n = self.n
        K = self.field
        base = [self.embed(em.const(self.base.field, c)) if not isinstance(c, em.FracElement)
                else self.embed(c) for c in base_components]
        frame = frame_components.entries if isinstance(frame_components, em.ExactMatrix) else frame_components
        flat = []
        for i in range(n):
            for j in range(n):
                c = frame[i][j]
                flat.append(self.embed(c) if isinstance(c, em.FracElement) else em.const(K, c))
        return VectorField(self.chart, tuple(base) + tuple(flat))

    def split(self, Z: VectorField):
        if Z.chart.variables != self.chart.variables:
            raise MixedCharts("field does not live on this frame bundle")
        n = self.n
        base = Z.components[:n]
        frame = em.ExactMatrix([Z.components[n + i * n:n + (i + 1) * n] for i in range(n)])
        return base, frame

    def gamma(self, conn: Connection):
        if conn.chart.variables != self.base.variables:
            raise MixedCharts("connection lives on another chart")
        n = self.n
        return [[[self.embed(conn.gamma[k][i][j]) for j in range(n)] for i in range(n)] for k in range(n)]

    # -- the parallelism --------------------------------------------------

    def fundamental_vertical(self, A) -> VectorField:
        """A*: zero base part, frame part X A."""
        A = A if isinstance(A, em.ExactMatrix) else em.ExactMatrix(A)
        K = self.field
        return self.make([K.zero] * self.n, self.X @ A.map(lambda e: em.const(K, e)))

    def standard_horizontal(self, conn: Connection, xi) -> VectorField:
        """B(xi): base part X xi, frame part -Gamma(X xi) X."""
        n = self.n
        K = self.field
        v = self.X @ em.ExactMatrix.column([em.const(K, e) for e in xi])
        base = v.col(0)
        G = self.gamma(conn)
        frame = [[K.zero] * n for _ in range(n)]
        for k, b in itertools.product(range(n), repeat=2):
            acc = K.zero
            for i, j in itertools.product(range(n), repeat=2):
                if G[k][i][j] != 0 and base[i] != 0:
                    acc += G[k][i][j] * base[i] * self.X[j, b]
            frame[k][b] = -acc
        return self.make(base, frame)

    def probe_set(self, conn: Connection) -> list[VectorField]:
        """B(e_1), ..., B(e_n), E*_11, ..., E*_nn."""
        n = self.n
        probes = []
        for i in range(n):
            probes.append(self.standard_horizontal(conn, [int(k == i) for k in range(n)]))
        for i, j in itertools.product(range(n), repeat=2):
            probes.append(self.fundamental_vertical(
                [[int((r, s) == (i, j)) for s in range(n)] for r in range(n)]))
        return probes

    def point_ok(self, point) -> bool:
        return self.chart.point_ok(point)


@dataclass(frozen=True)
class MatrixValuedForm:
    name: str
    fn: Callable

    def __call__(self, Z: VectorField) -> em.ExactMatrix:
        return self.fn(Z)

    evaluate = __call__


def theta(fb: FrameBundleChart) -> MatrixValuedForm:
    """theta(Z) = X^-1 (base part of Z), an n x 1 matrix."""

    def fn(Z):
        base, _ = fb.split(Z)
        return fb.Xinv @ em.ExactMatrix.column(base)

    return MatrixValuedForm("theta", fn)


def omega(fb: FrameBundleChart, conn: Connection) -> MatrixValuedForm:
    """omega(Z) = X^-1 (frame part + Gamma(base part) X)."""
    G = fb.gamma(conn)
    n = fb.n

    def fn(Z):
        base, frame = fb.split(Z)
        rows = []
        for k in range(n):
            row = []
            for b in range(n):
                acc = frame[k, b]
                for i, j in itertools.product(range(n), repeat=2):
                    if G[k][i][j] != 0 and base[i] != 0:
                        acc += G[k][i][j] * base[i] * fb.X[j, b]
                row.append(acc)
            rows.append(row)
        return fb.Xinv @ em.ExactMatrix(rows)

    return MatrixValuedForm("omega", fn)


def natural_lift(fb: FrameBundleChart, X: VectorField) -> VectorField:
    """L(X) = X^i d_i + (d_j X^k) X_jb d/dX_kb."""
    if X.chart.variables != fb.base.variables:
        raise MixedCharts("field does not live on the base chart")
    n = fb.n
    K = fb.field
    comps = [fb.embed(c) for c in X.components]
    gens = K.gens
    frame = [[K.zero] * n for _ in range(n)]
    for k, b in itertools.product(range(n), repeat=2):
        acc = K.zero
        for j in range(n):
            d = comps[k].diff(gens[j])
            if d != 0:
                acc += d * fb.X[j, b]
        frame[k][b] = acc
    return fb.make(comps, frame)


def _derive(Z: VectorField, M: em.ExactMatrix) -> em.ExactMatrix:
    return M.map(Z.apply)


def lie_derivative_form(fb: FrameBundleChart, Z: VectorField, form: MatrixValuedForm,
                        probes: Sequence[VectorField]) -> list[em.ExactMatrix]:
    """(L_Z alpha)(W) = Z(alpha(W)) - alpha([Z, W]) for every probe W."""
    return [_derive(Z, form(W)) - form(lie_bracket(Z, W)) for W in probes]


def eta_residual(fb: FrameBundleChart, conn: Connection, Z1: VectorField, Z2: VectorField):
    """Residuals of eta([Z1, Z2]) = (w1 t2 - w2 t1, [w1, w2]) with eta = (theta, omega)."""
    th, om = theta(fb), omega(fb, conn)
    t1, t2 = th(Z1), th(Z2)
    w1, w2 = om(Z1), om(Z2)
    br = lie_bracket(Z1, Z2)
    vec = th(br) - (w1 @ t2 - w2 @ t1)
    mat = om(br) - w1.commutator(w2)
    return vec, mat


def structure_residuals(fb: FrameBundleChart, conn: Connection, Z1: VectorField, Z2: VectorField):
    """Torsion and curvature forms Theta(Z1, Z2), Omega(Z1, Z2) from the structure equations."""
    th, om = theta(fb), omega(fb, conn)
    half = Fraction(1, 2)
    t1, t2 = th(Z1), th(Z2)
    w1, w2 = om(Z1), om(Z2)
    br = lie_bracket(Z1, Z2)
    dtheta = (_derive(Z1, t2) - _derive(Z2, t1) - th(br)).scale(half)
    domega = (_derive(Z1, w2) - _derive(Z2, w1) - om(br)).scale(half)
    Theta = dtheta + (w1 @ t2 - w2 @ t1).scale(half)
    Omega = domega + w1.commutator(w2).scale(half)
    return Theta, Omega


def probe_pairs(probes):
    return [(a, b) for a in range(len(probes)) for b in range(len(probes)) if a < b]


def right_translate_residual(fb: FrameBundleChart, Z: VectorField, a) -> tuple:
    """Components of (R_a)_* Z - Z o R_a; all zero iff Z is invariant under ``a``.

    ``a`` may hold rationals or rational functions in extra symbols (for a
    generic group element); the residual then lives in the larger field.
    """
    a = a if isinstance(a, em.ExactMatrix) else em.ExactMatrix(a)
    n = fb.n
    names = fb.chart.variables
    extra = []
    for e in (x for r in a.entries for x in r):
        if isinstance(e, em.FracElement):
            for v in em.field_variables(e.field):
                if v not in names and v not in extra:
                    extra.append(v)
    K = em.rational_field(names + tuple(extra)) if extra else fb.field
    R = K.ring

    def lift(f):
        if isinstance(f, em.FracElement):
            return f if f.field == K else K.from_expr(f.as_expr())
        return em.const(K, f)

    A = a.map(lift)
    Xs = em.ExactMatrix([[lift(fb.X[i, j]) for j in range(n)] for i in range(n)])
    XA = Xs @ A
    gens_sub = []
    for i, j in itertools.product(range(n), repeat=2):
        gens_sub.append((R.gens[n + i * n + j], XA[i, j]))

    def at_translate(f):
        f = lift(f)
        num = f.numer
        den = f.denom
        return _compose(num, gens_sub, K) / _compose(den, gens_sub, K)

    base, frame = fb.split(Z)
    moved_base = [at_translate(c) for c in base]
    moved_frame = frame.map(at_translate)
    push_frame = frame.map(lift) @ A
    comps = [lift(b) - mb for b, mb in zip(base, moved_base)]
    diff = push_frame - moved_frame
    comps += [diff[i, j] for i in range(n) for j in range(n)]
    return tuple(comps)


def is_right_invariant(fb: FrameBundleChart, Z: VectorField, a) -> bool:
    return all(c == 0 for c in right_translate_residual(fb, Z, a))


def generic_group_element(n: int) -> em.ExactMatrix:
    """Symbolic a = (a_ij) over Q(a11, ..., ann); det(a) is generically nonzero."""
    K = em.rational_field(tuple(f"a{i + 1}{j + 1}" for i in range(n) for j in range(n)))
    return em.ExactMatrix([[K.gens[i * n + j] for j in range(n)] for i in range(n)])


def _compose(p, subs, K):
    """Substitute rational functions for some ring generators of polynomial ``p``."""
    R = K.ring
    idx = {R.gens.index(g): v for g, v in subs}
    out = K.zero
    for monom, coeff in p.terms():
        term = K(coeff)
        for i, e in enumerate(monom):
            if not e:
                continue
            term *= (idx[i] if i in idx else K.gens[i]) ** e
        out += term
    return out


def orbit_map_rank(fb: FrameBundleChart, conn: Connection, fields: Sequence[VectorField], point) -> int:
    """Rank of the matrix with columns theta_u(L(X)_u), u the given bundle point."""
    fields = list(fields)
    for idx, X in enumerate(fields):
        v = is_infinitesimal_affine(conn, X)
        if not v:
            raise NotInfinitesimalAffine(f"field #{idx} is not an infinitesimal affine transformation", idx)
    point = tuple(Fraction(p) for p in point)
    if len(point) != fb.n + fb.n * fb.n:
        raise InvalidPoint(f"bundle point needs {fb.n + fb.n * fb.n} coordinates")
    try:
        ok = fb.point_ok(point)
    except ZeroDivisionError:
        ok = False
    if not ok:
        raise InvalidPoint(f"point {point} violates a nonvanishing constraint")
    th = theta(fb)
    cols = []
    for X in fields:
        t = th(natural_lift(fb, X))
        cols.append([em.evaluate(e, point) for e in t.col(0)])
    if not cols:
        return 0
    M = em.ExactMatrix([[cols[c][r] for c in range(len(cols))] for r in range(fb.n)])
    return em.rank(M)
