"""Finite-dimensional algebras given by structure constants.

``c[i][j][k]`` is the coefficient of e_k in e_i . e_j.  The module covers the
left-symmetric and associative axioms, the commutator Lie algebra, the
canonical affine representation e_i -> [[L_{e_i}, e_i], [0, 0]], formal
adjunction of a unit and associative closure of matrix sets.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import CapExceeded, JacobiFailure, NotAssociative, NotLeftSymmetric
from .exactmath import ExactMatrix, VectorSpan
from .verdict import Verdict


def _frac_array(c, n):
    return tuple(tuple(tuple(Fraction(c[i][j][k]) for k in range(n)) for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class StructureConstants:
    dim: int
    c: tuple
    basis_labels: tuple = ()

    def __post_init__(self):
        n = self.dim
        if len(self.c) != n or any(len(r) != n or any(len(v) != n for v in r) for r in self.c):
            raise ValueError(f"structure constants must have shape {n}x{n}x{n}")
        object.__setattr__(self, "c", _frac_array(self.c, n))
        labels = tuple(self.basis_labels) or tuple(f"e{i + 1}" for i in range(n))
        if len(labels) != n or len(set(labels)) != n:
            raise ValueError("basis labels must be n pairwise distinct names")
        object.__setattr__(self, "basis_labels", labels)

    @classmethod
    def zero(cls, n, labels=()):
        return cls(n, [[[0] * n for _ in range(n)] for _ in range(n)], labels)

    @classmethod
    def from_products(cls, n, products, labels=()):
        """``products`` maps (i, j) to a dict {k: coefficient} or a length-n sequence."""
        c = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
        for (i, j), val in products.items():
            items = val.items() if isinstance(val, dict) else enumerate(val)
            for k, v in items:
                c[i][j][k] = Fraction(v)
        return cls(n, c, labels)

    def mul(self, u, v):
        n = self.dim
        out = [Fraction(0)] * n
        for i in range(n):
            if not u[i]:
                continue
            for j in range(n):
                if not v[j]:
                    continue
                s = u[i] * v[j]
                cij = self.c[i][j]
                for k in range(n):
                    if cij[k]:
                        out[k] += s * cij[k]
        return tuple(out)

    def basis(self, i):
        return tuple(Fraction(int(k == i)) for k in range(self.dim))

    def left_matrix(self, i) -> ExactMatrix:
        n = self.dim
        return ExactMatrix([[self.c[i][j][k] for j in range(n)] for k in range(n)])

    def opposite(self):
        n = self.dim
        return StructureConstants(n, [[self.c[j][i] for j in range(n)] for i in range(n)], self.basis_labels)

    def change_basis(self, P: ExactMatrix):
        """Constants in the basis f_a = sum_i P[i][a] e_i."""
        n = self.dim
        Pinv = P.inverse()
        cols = [P.col(a) for a in range(n)]
        c = [[None] * n for _ in range(n)]
        for a, b in itertools.product(range(n), repeat=2):
            prod = self.mul(cols[a], cols[b])
            c[a][b] = tuple(sum((Pinv[k, i] * prod[i] for i in range(n)), Fraction(0)) for k in range(n))
        return StructureConstants(n, c)

    def direct_sum(self, other):
        n, m = self.dim, other.dim
        c = [[[Fraction(0)] * (n + m) for _ in range(n + m)] for _ in range(n + m)]
        for i, j, k in itertools.product(range(n), repeat=3):
            c[i][j][k] = self.c[i][j][k]
        for i, j, k in itertools.product(range(m), repeat=3):
            c[n + i][n + j][n + k] = other.c[i][j][k]
        return StructureConstants(n + m, c)

    def format_product(self, vec) -> str:
        return format_combination(vec, self.basis_labels)


def format_combination(vec, labels) -> str:
    parts = []
    for coeff, label in zip(vec, labels):
        coeff = Fraction(coeff)
        if coeff == 0:
            continue
        sign = "-" if coeff < 0 else "+"
        mag = abs(coeff)
        body = label if mag == 1 else f"{mag}{label}" if mag.denominator == 1 else f"({mag}){label}"
        parts.append((sign, body))
    if not parts:
        return "0"
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def _assoc(A, i, j, k):
    ei, ej, ek = A.basis(i), A.basis(j), A.basis(k)
    return tuple(a - b for a, b in zip(A.mul(A.mul(ei, ej), ek), A.mul(ei, A.mul(ej, ek))))


def check_left_symmetric(A: StructureConstants) -> Verdict:
    """(xy)z - x(yz) = (yx)z - y(xz) over all basis triples; first failure reported."""
    n = A.dim
    for i, j, k in itertools.product(range(n), repeat=3):
        d = tuple(a - b for a, b in zip(_assoc(A, i, j, k), _assoc(A, j, i, k)))
        if any(d):
            return Verdict.fail((i, j, k), d)
    return Verdict.ok()


def check_associative(A: StructureConstants) -> Verdict:
    """(e_i e_j) e_k = e_i (e_j e_k); every violating triple is collected."""
    n = A.dim
    bad = []
    for i, j, k in itertools.product(range(n), repeat=3):
        d = _assoc(A, i, j, k)
        if any(d):
            bad.append(((i, j, k), d))
    if bad:
        return Verdict.fail(bad[0][0], bad[0][1], bad)
    return Verdict.ok()


@dataclass(frozen=True)
class LieStructure:
    dim: int
    b: tuple
    labels: tuple = ()

    def __post_init__(self):
        n = self.dim
        object.__setattr__(self, "b", _frac_array(self.b, n))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"e{i + 1}" for i in range(n)))
        for i, j in itertools.product(range(n), repeat=2):
            if any(self.b[i][j][k] != -self.b[j][i][k] for k in range(n)):
                raise ValueError(f"bracket is not antisymmetric at ({i}, {j})")
        for i, j, k in itertools.combinations(range(n), 3):
            r = self.jacobiator(i, j, k)
            if any(r):
                raise JacobiFailure((i, j, k), r)

    def bracket(self, u, v):
        n = self.dim
        out = [Fraction(0)] * n
        for i, j in itertools.product(range(n), repeat=2):
            s = u[i] * v[j]
            if s:
                for k in range(n):
                    out[k] += s * self.b[i][j][k]
        return tuple(out)

    def jacobiator(self, i, j, k):
        n = self.dim
        e = [tuple(Fraction(int(a == t)) for a in range(n)) for t in range(n)]
        x, y, z = e[i], e[j], e[k]
        terms = [self.bracket(self.bracket(x, y), z), self.bracket(self.bracket(y, z), x),
                 self.bracket(self.bracket(z, x), y)]
        return tuple(sum(t[m] for t in terms) for m in range(n))


def commutator_algebra(A: StructureConstants) -> LieStructure:
    n = A.dim
    b = [[[A.c[i][j][k] - A.c[j][i][k] for k in range(n)] for j in range(n)] for i in range(n)]
    return LieStructure(n, b, A.basis_labels)


class AffineRepElement:
    """(n+1)x(n+1) matrix [[L, t], [0, 0]] acting on R^n by x -> Lx + t."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        if not isinstance(matrix, ExactMatrix):
            matrix = ExactMatrix(matrix)
        if matrix.rows != matrix.cols or matrix.rows < 1:
            raise ValueError("affine representation matrices are square")
        if any(e != 0 for e in matrix.row(matrix.rows - 1)):
            raise ValueError("last row of an affine algebra element must vanish")
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("AffineRepElement is immutable")

    @classmethod
    def from_parts(cls, linear: ExactMatrix, translation):
        n = linear.rows
        rows = [list(linear.row(i)) + [Fraction(translation[i])] for i in range(n)]
        rows.append([Fraction(0)] * (n + 1))
        return cls(ExactMatrix(rows))

    @property
    def n(self):
        return self.matrix.rows - 1

    @property
    def linear(self) -> ExactMatrix:
        return ExactMatrix([r[:-1] for r in self.matrix.entries[:-1]])

    @property
    def translation(self):
        return tuple(r[-1] for r in self.matrix.entries[:-1])

    def __eq__(self, other):
        return isinstance(other, AffineRepElement) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"AffineRepElement({self.matrix})"

    def bracket(self, other):
        return AffineRepElement(self.matrix.commutator(other.matrix))


def affine_rep(A: StructureConstants) -> list[AffineRepElement]:
    v = check_left_symmetric(A)
    if not v:
        raise NotLeftSymmetric(f"product is not left-symmetric at basis triple {v.witness}")
    return [AffineRepElement.from_parts(A.left_matrix(i), A.basis(i)) for i in range(A.dim)]


def check_lie_homomorphism(reps: Sequence[AffineRepElement], L: LieStructure) -> Verdict:
    """[eta(e_i), eta(e_j)] = eta([e_i, e_j]) for every pair."""
    reps = list(reps)
    if len(reps) != L.dim:
        raise ValueError("need exactly one representative per basis vector")
    n = L.dim
    for i, j in itertools.product(range(n), repeat=2):
        lhs = reps[i].matrix.commutator(reps[j].matrix)
        rhs = ExactMatrix.zeros(lhs.rows, lhs.cols)
        for k in range(n):
            if L.b[i][j][k]:
                rhs = rhs + reps[k].matrix.scale(L.b[i][j][k])
        if lhs != rhs:
            return Verdict.fail((i, j), lhs - rhs)
    return Verdict.ok()


@dataclass
class ClosureResult:
    """Basis of an associative closure with its multiplication table.

    ``table[i][j]`` holds the coordinates of basis[i] . basis[j] in the basis;
    ``trace[m]`` is ``("generator", g)`` or ``("product", i, j)``.
    """

    basis: list
    table: tuple
    trace: list
    labels: list = field(default_factory=list)

    @property
    def dim(self):
        return len(self.basis)

    def structure_constants(self) -> StructureConstants:
        return StructureConstants(self.dim, self.table, tuple(self.labels))


def closure(generators, mul: Callable, span_factory: Callable, cap: int, labels=None,
            pmap=None) -> ClosureResult:
    """Breadth-first associative closure.

    Each round multiplies every pair involving an element admitted in the
    previous round; candidates are admitted in (i, j) row-major order, so
    the resulting basis does not depend on scheduling.
    """
    pmap = pmap or (lambda fn, xs: [fn(x) for x in xs])
    span = span_factory()
    basis, trace, names = [], [], []
    for g, gen in enumerate(generators):
        if span.add(gen):
            basis.append(gen)
            trace.append(("generator", g))
            names.append(labels[g] if labels else f"g{g + 1}")
    if len(basis) > cap:
        raise CapExceeded(f"generators already span {len(basis)} > cap {cap}")
    products = {}
    done = 0
    while done < len(basis):
        m = len(basis)
        pairs = [(i, j) for i in range(m) for j in range(m) if i >= done or j >= done]
        results = pmap(lambda ij: mul(basis[ij[0]], basis[ij[1]]), pairs)
        for (i, j), p in zip(pairs, results):
            products[(i, j)] = p
            if span.add(p):
                basis.append(p)
                trace.append(("product", i, j))
                names.append(f"{names[i]}*{names[j]}")
                if len(basis) > cap:
                    raise CapExceeded(f"closure exceeded cap {cap}")
        done = m
    n = len(basis)
    table = tuple(tuple(span.coordinates(products[(i, j)]) for j in range(n)) for i in range(n))
    return ClosureResult(basis, table, trace, names)


def matrix_envelope(generators: Sequence[ExactMatrix], cap: int | None = None) -> ClosureResult:
    """Smallest associative matrix algebra (no unit forced) containing the generators."""
    gens = [g.matrix if isinstance(g, AffineRepElement) else g for g in generators]
    if not gens:
        return ClosureResult([], (), [], [])
    size = gens[0].rows
    if any(g.rows != size or g.cols != size for g in gens):
        raise ValueError("generators must be square matrices of one size")
    if cap is None:
        cap = size * size
    return closure(gens, lambda a, b: a @ b, VectorSpan, cap)


def adjoin_unit(A: StructureConstants, require_associative: bool = False) -> StructureConstants:
    """A + R1 with the new unit as the last basis vector."""
    if require_associative:
        v = check_associative(A)
        if not v:
            raise NotAssociative(f"algebra is not associative at basis triple {v.witness}")
    n = A.dim
    m = n + 1
    c = [[[Fraction(0)] * m for _ in range(m)] for _ in range(m)]
    for i, j, k in itertools.product(range(n), repeat=3):
        c[i][j][k] = A.c[i][j][k]
    for i in range(m):
        c[n][i][i] = Fraction(1)
        c[i][n][i] = Fraction(1)
    labels = A.basis_labels + ("1" if "1" not in A.basis_labels else "unit",)
    return StructureConstants(m, c, labels)


def _float_matrix(m):
    if isinstance(m, AffineRepElement):
        m = m.matrix
    if isinstance(m, ExactMatrix):
        return np.array([[float(e) for e in r] for r in m.entries], dtype=float)
    return np.asarray(m, dtype=float)


def matrix_exponential_numeric(m, t: float = 1.0) -> np.ndarray:
    """exp(t m) in double precision (scaling and squaring with a Pade core)."""
    return expm(t * _float_matrix(m))


def orbit_sample(reps: Sequence[AffineRepElement], grid) -> list[tuple]:
    """Points exp(t1 eta_1) ... exp(tk eta_k) . 0 for each parameter tuple."""
    mats = [_float_matrix(r) for r in reps]
    if not mats:
        return []
    size = mats[0].shape[0]
    origin = np.zeros(size)
    origin[-1] = 1.0
    out = []
    for ts in grid:
        if len(ts) != len(mats):
            raise ValueError("each grid tuple needs one parameter per representative")
        g = np.eye(size)
        for t, m in zip(ts, mats):
            g = g @ expm(float(t) * m)
        p = g @ origin
        out.append(tuple(float(v) for v in p[:-1]))
    return out


def orbit_jacobian_at_origin(reps: Sequence[AffineRepElement]) -> ExactMatrix:
    """Exact differential of the orbit map at t = 0: columns eta_i applied to the origin."""
    reps = list(reps)
    n = reps[0].n
    return ExactMatrix([[reps[i].translation[r] for i in range(len(reps))] for r in range(n)])


def uniform_grid(k: int, dims: int, lo: float = -1.0, hi: float = 1.0) -> list[tuple]:
    if k < 1:
        raise ValueError("grid needs at least one point per axis")
    axis = [lo + (hi - lo) * i / (k - 1) for i in range(k)] if k > 1 else [lo]
    return list(itertools.product(axis, repeat=dims))


# -- catalogue ---------------------------------------------------------------

def eq14_algebra() -> StructureConstants:
    """e1e1 = 2e1, e1e2 = e2, e2e1 = 0, e2e2 = e1 on aff(R)."""
    return StructureConstants.from_products(2, {(0, 0): [2, 0], (0, 1): [0, 1], (1, 1): [1, 0]})


def generic_aff_algebra(alpha) -> StructureConstants:
    """e1e1 = alpha e1, e1e2 = e2, all other products zero."""
    return StructureConstants.from_products(2, {(0, 0): [alpha, 0], (0, 1): [0, 1]})


def matrix_unit_algebra(n: int) -> StructureConstants:
    """gl_n under composition, basis E_11, E_12, ..., E_nn (row-major)."""
    idx = {(r, s): r * n + s for r in range(n) for s in range(n)}
    c = [[[0] * (n * n) for _ in range(n * n)] for _ in range(n * n)]
    for (p, q), (r, s) in itertools.product(idx, repeat=2):
        if q == r:
            c[idx[(p, q)]][idx[(r, s)]][idx[(p, s)]] = 1
    labels = [f"E{r + 1}{s + 1}" for r in range(n) for s in range(n)]
    return StructureConstants(n * n, c, labels)
