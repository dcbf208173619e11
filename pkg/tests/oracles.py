"""Independent reference computations on plain sympy expressions.

Nothing here imports flatlab internals beyond reading a connection's
Christoffel symbols as text, so these routes share no arithmetic with the
library.
"""
import itertools
from fractions import Fraction

import sympy


def symbols(names):
    return [sympy.Symbol(n) for n in names]


def gamma_exprs(conn):
    from flatlab.exactmath import fmt

    n = conn.dim
    loc = {v: sympy.Symbol(v) for v in conn.chart.variables}
    return [[[sympy.sympify(fmt(conn.gamma[k][i][j]).replace("^", "**"), locals=loc)
              for j in range(n)] for i in range(n)] for k in range(n)]


def field_exprs(X):
    from flatlab.exactmath import fmt

    loc = {v: sympy.Symbol(v) for v in X.chart.variables}
    return [sympy.sympify(fmt(c).replace("^", "**"), locals=loc) for c in X.components]


def nabla(G, xs, X, Y):
    n = len(xs)
    out = []
    for k in range(n):
        e = sum(X[i] * sympy.diff(Y[k], xs[i]) for i in range(n))
        e += sum(G[k][i][j] * X[i] * Y[j] for i in range(n) for j in range(n))
        out.append(sympy.cancel(e))
    return out


def bracket(xs, X, Y):
    n = len(xs)
    return [sympy.cancel(sum(X[i] * sympy.diff(Y[k], xs[i]) - Y[i] * sympy.diff(X[k], xs[i])
                             for i in range(n))) for k in range(n)]


def coordinate(n, i):
    return [sympy.Integer(int(k == i)) for k in range(n)]


def curvature_operator(G, xs, i, j, k):
    """R(d_i, d_j) d_k = nabla_i nabla_j d_k - nabla_j nabla_i d_k (coordinate fields commute)."""
    n = len(xs)
    di, dj, dk = coordinate(n, i), coordinate(n, j), coordinate(n, k)
    a = nabla(G, xs, di, nabla(G, xs, dj, dk))
    b = nabla(G, xs, dj, nabla(G, xs, di, dk))
    return [sympy.cancel(p - q) for p, q in zip(a, b)]


def is_flat(G, xs):
    n = len(xs)
    for k, i, j in itertools.product(range(n), repeat=3):
        if sympy.cancel(G[k][i][j] - G[k][j][i]) != 0:
            return False
    for i, j, k in itertools.product(range(n), repeat=3):
        if any(c != 0 for c in curvature_operator(G, xs, i, j, k)):
            return False
    return True


def affine(G, xs, X):
    """Lie derivative of the connection along X vanishes (checked on coordinate pairs).

    (L_X nabla)(Y, Z) = [X, nabla_Y Z] - nabla_[X,Y] Z - nabla_Y [X, Z].
    """
    n = len(xs)
    for i, j in itertools.product(range(n), repeat=2):
        Y, Z = coordinate(n, i), coordinate(n, j)
        t = bracket(xs, X, nabla(G, xs, Y, Z))
        u = nabla(G, xs, bracket(xs, X, Y), Z)
        v = nabla(G, xs, Y, bracket(xs, X, Z))
        if any(sympy.cancel(a - b - c) != 0 for a, b, c in zip(t, u, v)):
            return False
    return True


def rank(rows):
    return sympy.Matrix(rows).rank()


def expm_taylor(rows, t=1, terms=40):
    """Truncated exponential series in exact rationals, returned as floats."""
    n = len(rows)
    A = [[Fraction(v) * Fraction(t) for v in r] for r in rows]
    term = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    total = [r[:] for r in term]
    for m in range(1, terms):
        term = [[sum(term[i][k] * A[k][j] for k in range(n)) / m for j in range(n)] for i in range(n)]
        total = [[total[i][j] + term[i][j] for j in range(n)] for i in range(n)]
    return [[float(v) for v in r] for r in total]
