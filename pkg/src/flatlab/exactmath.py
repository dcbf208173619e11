"""Exact scalars, rational functions and linear algebra over Q and Q(x).

Rational numbers are :class:`fractions.Fraction`.  Multivariate rational
functions are elements of a sympy sparse fraction field over QQ with graded
lexicographic order; sympy cancels every result to a reduced fraction whose
denominator has positive leading coefficient, so equal functions have equal
canonical forms.
"""
from __future__ import annotations

import ast
from fractions import Fraction
from functools import lru_cache
from typing import Any, Sequence

import sympy
from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, FracField
from sympy.polys.orderings import grlex

from .errors import (
    DivisionByZero,
    MixedCharts,
    ParseError,
    SingularMatrix,
    UnknownVariable,
)

Rational = Fraction
RationalFunction = FracElement


@lru_cache(maxsize=None)
def rational_field(variables: tuple[str, ...]) -> FracField:
    """The field Q(variables), shared per variable tuple."""
    variables = tuple(variables)
    if not variables:
        raise ValueError("a rational function field needs at least one variable")
    if len(set(variables)) != len(variables):
        raise ValueError(f"duplicate variable names in {variables}")
    return FracField(tuple(sympy.Symbol(v) for v in variables), QQ, grlex)


def field_variables(K: FracField) -> tuple[str, ...]:
    return tuple(str(s) for s in K.symbols)


def to_fraction(q: Any) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, FracElement):
        if not is_constant(q):
            raise ValueError(f"{fmt(q)} is not constant")
        return constant_value(q)
    return Fraction(int(q.numerator), int(q.denominator))


def const(K: FracField, value) -> FracElement:
    if isinstance(value, FracElement):
        return value
    value = Fraction(value)
    return K(QQ(value.numerator, value.denominator))


def is_constant(f: FracElement) -> bool:
    return f.numer.is_ground and f.denom.is_ground


def constant_value(f: FracElement) -> Fraction:
    return to_fraction(f.numer.LC) / to_fraction(f.denom.LC)


def is_polynomial(f: FracElement) -> bool:
    return f.denom.is_ground


def arith(a: FracElement, b: FracElement, op: str) -> FracElement:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise DivisionByZero("division by the zero function")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def _var_index(K: FracField, var) -> int:
    names = field_variables(K)
    if isinstance(var, int):
        if not 0 <= var < len(names):
            raise UnknownVariable(f"variable index {var} out of range for {names}")
        return var
    try:
        return names.index(str(var))
    except ValueError:
        raise UnknownVariable(f"unknown variable {var!r}; chart has {names}") from None


def partial_derivative(f: FracElement, var) -> FracElement:
    K = f.field
    return f.diff(K.gens[_var_index(K, var)])


def evaluate(f: FracElement, point: Sequence) -> Fraction:
    """Value of ``f`` at a rational point (one coordinate per variable)."""
    vals = [QQ(Fraction(v).numerator, Fraction(v).denominator) for v in point]
    if len(vals) != f.field.ngens:
        raise ValueError("point dimension does not match the variable count")

    def ev(p):
        total = QQ(0)
        for monom, coeff in p.terms():
            term = coeff
            for v, e in zip(vals, monom):
                if e:
                    term *= v**e
            total += term
        return total

    den = ev(f.denom)
    if den == 0:
        raise DivisionByZero(f"{fmt(f)} has a vanishing denominator at {tuple(point)}")
    return to_fraction(ev(f.numer)) / to_fraction(den)


# -- rendering ---------------------------------------------------------------

def _grlex_key(monom):
    return (sum(monom), monom)


def _fmt_monomial(names, monom) -> str:
    parts = []
    for name, e in zip(names, monom):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def fmt_poly(p, names=None) -> str:
    if names is None:
        names = [str(s) for s in p.ring.symbols]
    terms = sorted(p.terms(), key=lambda t: _grlex_key(t[0]), reverse=True)
    if not terms:
        return "0"
    out = []
    for k, (monom, coeff) in enumerate(terms):
        c = to_fraction(coeff)
        neg = c < 0
        c = abs(c)
        mono = _fmt_monomial(names, monom)
        if not mono:
            body = str(c)
        elif c == 1:
            body = mono
        else:
            body = f"{c}*{mono}"
        if k == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def _is_atom(p) -> bool:
    # safe after "/" without parentheses: "x", "x^2" or a positive integer
    if len(p.terms()) != 1:
        return False
    monom, coeff = p.terms()[0]
    c = to_fraction(coeff)
    if sum(monom) == 0:
        return c.denominator == 1 and c > 0
    return c == 1 and sum(1 for e in monom if e) == 1


def fmt(f) -> str:
    """Canonical text of a rational function (or a rational number)."""
    if not isinstance(f, FracElement):
        return str(Fraction(f))
    num = fmt_poly(f.numer)
    if f.denom.is_ground and to_fraction(f.denom.LC) == 1:
        return num
    den = fmt_poly(f.denom)
    if len(f.numer.terms()) > 1:
        num = f"({num})"
    if not _is_atom(f.denom):
        den = f"({den})"
    return f"{num}/{den}"


# -- parsing -----------------------------------------------------------------

def _caret_to_pow(text: str):
    out = []
    colmap = []
    for i, ch in enumerate(text):
        if ch == "^":
            out.append("**")
            colmap.extend([i, i])
        else:
            out.append(ch)
            colmap.append(i)
    return "".join(out), colmap


def parse_expr(text: str, K: FracField, source: str | None = None) -> FracElement:
    """Parse integers, variables, + - * / ^ and parentheses into ``K``."""
    if not isinstance(text, str):
        if isinstance(text, (int, Fraction)):
            return const(K, text)
        raise ParseError(f"expected an expression string, got {type(text).__name__}", source=source)
    converted, colmap = _caret_to_pow(text)

    def column(offset):
        if offset is None:
            return None
        offset = max(offset, 0)
        return (colmap[offset] if offset < len(colmap) else len(text)) + 1

    try:
        tree = ast.parse(converted.strip() or "(", mode="eval")
    except SyntaxError as exc:
        lead = len(converted) - len(converted.lstrip())
        raise ParseError(f"syntax error: {exc.msg}", exc.lineno or 1,
                         column((exc.offset or 1) - 1 + lead), source) from None

    names = field_variables(K)
    lead = len(converted) - len(converted.lstrip())

    def fail(node, msg):
        raise ParseError(msg, getattr(node, "lineno", 1),
                         column(getattr(node, "col_offset", 0) + lead), source)

    def integer(node) -> int:
        if isinstance(node, ast.Constant) and type(node.value) is int:
            return node.value
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = integer(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        fail(node, "exponents must be integer literals")

    def ev(node):
        if isinstance(node, ast.Constant):
            if type(node.value) is int:
                return K(node.value)
            fail(node, f"unsupported literal {node.value!r}")
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise UnknownVariable(f"unknown variable {node.id!r} in {text!r}; chart has {names}")
            return K.gens[names.index(node.id)]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                base, e = ev(node.left), integer(node.right)
                if e < 0 and base == 0:
                    raise DivisionByZero(f"zero raised to a negative power in {text!r}")
                return base**e
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if b == 0:
                    raise DivisionByZero(f"division by zero in {text!r}")
                return a / b
        fail(node, "unsupported syntax")

    return ev(tree.body)


# -- matrices ----------------------------------------------------------------

def _exact(e):
    # plain ints would turn "/" into float division
    if isinstance(e, FracElement):
        return e
    if isinstance(e, float):
        raise TypeError("floats are not exact matrix entries")
    return Fraction(e)


class ExactMatrix:
    """Immutable rectangular matrix of Fractions or rational functions."""

    __slots__ = ("entries",)

    def __init__(self, rows):
        entries = tuple(tuple(_exact(e) for e in r) for r in rows)
        if entries and len({len(r) for r in entries}) != 1:
            raise ValueError("matrix rows have different lengths")
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    @classmethod
    def identity(cls, n, one=Fraction(1), zero=Fraction(0)):
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows, cols, zero=Fraction(0)):
        return cls([[zero] * cols for _ in range(rows)])

    @classmethod
    def column(cls, values):
        return cls([[v] for v in values])

    @property
    def rows(self):
        return len(self.entries)

    @property
    def cols(self):
        return len(self.entries[0]) if self.entries else 0

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def col(self, j):
        return tuple(r[j] for r in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for r, s in zip(self.entries, other.entries) for a, b in zip(r, s))

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"ExactMatrix({[[fmt(e) for e in r] for r in self.entries]})"

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(fmt(e) for e in r) + "]" for r in self.entries) + "]"

    def map(self, fn):
        return ExactMatrix([[fn(e) for e in r] for r in self.entries])

    def _check_shape(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check_shape(other)
        return ExactMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._check_shape(other)
        return ExactMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def scale(self, s):
        return self.map(lambda e: s * e)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        cols = [other.col(j) for j in range(other.cols)]
        out = []
        for r in self.entries:
            row = []
            for c in cols:
                acc = None
                for a, b in zip(r, c):
                    if a == 0 or b == 0:
                        continue
                    acc = a * b if acc is None else acc + a * b
                row.append(acc if acc is not None else r[0] * 0)
            out.append(row)
        return ExactMatrix(out)

    def commutator(self, other):
        return self @ other - other @ self

    def transpose(self):
        return ExactMatrix(zip(*self.entries)) if self.entries else self

    T = property(transpose)

    def is_zero(self):
        return all(e == 0 for r in self.entries for e in r)

    def inverse(self):
        n = self.rows
        if n != self.cols:
            raise ValueError("only square matrices are invertible")
        a = [list(r) for r in self.entries]
        one = a[0][0] ** 0 if n else Fraction(1)
        zero = one * 0
        inv = [[one if i == j else zero for j in range(n)] for i in range(n)]
        for c in range(n):
            p = next((i for i in range(c, n) if a[i][c] != 0), None)
            if p is None:
                raise SingularMatrix("matrix is singular")
            a[c], a[p] = a[p], a[c]
            inv[c], inv[p] = inv[p], inv[c]
            piv = a[c][c]
            a[c] = [e / piv for e in a[c]]
            inv[c] = [e / piv for e in inv[c]]
            for i in range(n):
                f = a[i][c]
                if i == c or f == 0:
                    continue
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
                inv[i] = [x - f * y for x, y in zip(inv[i], inv[c])]
        return ExactMatrix(inv)

    def det(self):
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        rows = [list(r) for r in self.entries]
        n = len(rows)
        sign = 1
        prev = None
        for c in range(n):
            p = next((i for i in range(c, n) if rows[i][c] != 0), None)
            if p is None:
                return rows[0][0] * 0
            if p != c:
                rows[c], rows[p] = rows[p], rows[c]
                sign = -sign
            for i in range(c + 1, n):
                for j in range(c + 1, n):
                    v = rows[c][c] * rows[i][j] - rows[i][c] * rows[c][j]
                    rows[i][j] = v if prev is None else v / prev
            prev = rows[c][c]
        return rows[-1][-1] if sign > 0 else -rows[-1][-1]


def _echelon_fraction_free(rows):
    """Bareiss elimination in place; returns the pivot columns."""
    m = len(rows)
    n = len(rows[0]) if rows else 0
    prev = None
    r = 0
    pivots = []
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        for i in range(r + 1, m):
            a = rows[i][c]
            for j in range(c + 1, n):
                v = piv * rows[i][j] - a * rows[r][j]
                rows[i][j] = v if prev is None else v / prev
            rows[i][c] = a * 0
        # rows above r keep their scale; divisions stay exact below the pivot
        prev = piv
        pivots.append(c)
        r += 1
    return pivots


def rank_and_nullspace(M) -> tuple[int, list[tuple]]:
    """Rank and a right-nullspace basis of an exact matrix.

    Over Q(x) the rank is the generic rank (rank over the fraction field).
    """
    if not isinstance(M, ExactMatrix):
        M = ExactMatrix(M)
    if M.rows == 0 or M.cols == 0:
        return 0, [tuple(Fraction(int(i == j)) for j in range(M.cols)) for i in range(M.cols)]
    rows = [list(r) for r in M.entries]
    pivots = _echelon_fraction_free(rows)
    rank = len(pivots)
    sample = M.entries[0][0]
    one = sample ** 0 if isinstance(sample, FracElement) else Fraction(1)
    zero = one * 0
    free = [c for c in range(M.cols) if c not in pivots]
    basis = []
    for f in free:
        x = [zero] * M.cols
        x[f] = one
        for r in range(rank - 1, -1, -1):
            pc = pivots[r]
            s = zero
            for j in range(pc + 1, M.cols):
                if rows[r][j] != 0 and x[j] != 0:
                    s += rows[r][j] * x[j]
            x[pc] = -s / rows[r][pc]
        basis.append(tuple(x))
    return rank, basis


def rank(M) -> int:
    return rank_and_nullspace(M)[0]


class Echelon:
    """Incremental row echelon form of sparse Q-vectors.

    Vectors are dicts from arbitrary hashable keys to Fractions.  Each stored
    row remembers how it combines the admitted basis vectors, so membership
    tests return exact coordinates.
    """

    def __init__(self):
        self._rows = []  # (pivot key, row dict, combination dict)
        self.size = 0

    def _reduce(self, vec):
        v = {k: Fraction(c) for k, c in vec.items() if c != 0}
        combo = {}
        for piv, row, rc in self._rows:
            f = v.get(piv)
            if not f:
                continue
            for k, c in row.items():
                nv = v.get(k, 0) - f * c
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
            for b, c in rc.items():
                nc = combo.get(b, 0) + f * c
                if nc:
                    combo[b] = nc
                else:
                    combo.pop(b, None)
        return v, combo

    def coordinates(self, vec):
        residual, combo = self._reduce(vec)
        if residual:
            return None
        return tuple(Fraction(combo.get(i, 0)) for i in range(self.size))

    def add(self, vec) -> bool:
        residual, combo = self._reduce(vec)
        if not residual:
            return False
        piv = min(residual, key=repr)
        p = residual[piv]
        row = {k: c / p for k, c in residual.items()}
        rc = {b: -c / p for b, c in combo.items()}
        rc[self.size] = 1 / p
        self._rows.append((piv, row, rc))
        self.size += 1
        return True


def poly_coefficients(p, tag=()) -> dict:
    return {tag + (monom,): to_fraction(c) for monom, c in p.terms()}


class FieldSpan:
    """Q-linear span of tuples of rational functions over one field.

    Independence over the constants is decided on numerator coefficients
    after clearing a common denominator, which is enlarged (and the echelon
    rebuilt) whenever a new element brings a new denominator factor.
    """

    def __init__(self, K: FracField | None = None):
        self.K = K
        self.elements: list[tuple] = []
        self._den = None
        self._ech = Echelon()

    def _flatten(self, comps):
        vec = {}
        for idx, f in enumerate(comps):
            if f == 0:
                continue
            q = self._den.exquo(f.denom)
            for monom, c in (f.numer * q).terms():
                vec[(idx, monom)] = to_fraction(c)
        return vec

    def _prepare(self, comps):
        comps = tuple(comps)
        for f in comps:
            if not isinstance(f, FracElement):
                raise TypeError("FieldSpan elements must be rational functions")
            if self.K is None:
                self.K = f.field
            elif f.field != self.K:
                raise MixedCharts(
                    f"variables {field_variables(f.field)} differ from {field_variables(self.K)}")
        den = self._den if self._den is not None else self.K.ring.one
        new = den
        for f in comps:
            if f != 0 and not f.denom.is_ground:
                new = new.lcm(f.denom)
        if self._den is None or new != self._den:
            self._den = new
            self._ech = Echelon()
            for e in self.elements:
                self._ech.add(self._flatten(e))
        return comps

    def coordinates(self, comps):
        comps = self._prepare(comps)
        return self._ech.coordinates(self._flatten(comps))

    def add(self, comps) -> bool:
        comps = self._prepare(comps)
        if self._ech.add(self._flatten(comps)):
            self.elements.append(comps)
            return True
        return False

    def __len__(self):
        return len(self.elements)


class VectorSpan:
    """Q-linear span of constant vectors (Fractions) or exact matrices."""

    def __init__(self):
        self.elements = []
        self._ech = Echelon()

    @staticmethod
    def _flatten(v):
        if isinstance(v, ExactMatrix):
            return {(i, j): Fraction(e) for i, r in enumerate(v.entries) for j, e in enumerate(r) if e != 0}
        return {i: Fraction(e) for i, e in enumerate(v) if e != 0}

    def coordinates(self, v):
        return self._ech.coordinates(self._flatten(v))

    def add(self, v) -> bool:
        if self._ech.add(self._flatten(v)):
            self.elements.append(v)
            return True
        return False

    def __len__(self):
        return len(self.elements)


def _components_of(v):
    return tuple(v.components) if hasattr(v, "components") else tuple(v)


def _variables_of(v):
    if hasattr(v, "chart"):
        return tuple(v.chart.variables)
    comps = _components_of(v)
    for c in comps:
        if isinstance(c, FracElement):
            return field_variables(c.field)
    return None


def span_for(items):
    """A fresh span object suited to the element kind of ``items``."""
    items = list(items)
    seen = {_variables_of(v) for v in items} - {None}
    if len(seen) > 1:
        raise MixedCharts(f"elements live on different charts: {sorted(seen)}")
    if seen:
        K = rational_field(seen.pop())
        return _ConvertingFieldSpan(K)
    return VectorSpan()


class _ConvertingFieldSpan(FieldSpan):
    def _prepare(self, comps):
        return super()._prepare(tuple(const(self.K, c) for c in _components_of(comps)))


def independent_subset(vs):
    """Greedy maximal independent sublist and the coordinates of every input.

    Returns ``(basis, coordinates)`` where ``coordinates`` is an
    ``len(vs) x len(basis)`` ExactMatrix over Q.
    """
    vs = list(vs)
    span = span_for(vs)
    basis_idx = []
    for i, v in enumerate(vs):
        comps = v if isinstance(v, ExactMatrix) else _components_of(v)
        if span.add(comps):
            basis_idx.append(i)
    coords = []
    for v in vs:
        comps = v if isinstance(v, ExactMatrix) else _components_of(v)
        coords.append(span.coordinates(comps))
    basis = [vs[i] for i in basis_idx]
    return basis, ExactMatrix(coords) if coords and basis else ExactMatrix([[] for _ in vs])


def independent_indices(vs) -> list[int]:
    span = span_for(vs)
    out = []
    for i, v in enumerate(vs):
        comps = v if isinstance(v, ExactMatrix) else _components_of(v)
        if span.add(comps):
            out.append(i)
    return out
