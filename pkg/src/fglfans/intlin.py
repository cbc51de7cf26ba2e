"""Exact integer linear algebra: Smith and Hermite forms, kernels, saturation.

Everything works on plain Python ints, so there is no overflow and no
floating point anywhere.  Matrices are :class:`IntMatrix` values (immutable,
row-major); lattices are :class:`LatticeSubspace` values given by a list of
basis rows.

Pivoting is deterministic throughout: the entry of smallest non-zero absolute
value wins, ties go to the lowest (row, column) index.  The Hermite form used
for canonical representatives is row-style: an upper echelon basis of the row
lattice with positive pivots and every entry above a pivot reduced into
``[0, pivot)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

Vector = tuple[int, ...]


class IntLinError(ValueError):
    """Raised on malformed input (shape mismatch, non-saturated lattice)."""


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix with explicit shape (so 0 x n matrices are fine)."""

    nrows: int
    ncols: int
    entries: tuple[Vector, ...]

    def __post_init__(self):
        if self.nrows < 0 or self.ncols < 0:
            raise IntLinError("negative dimension")
        if len(self.entries) != self.nrows or any(len(r) != self.ncols for r in self.entries):
            raise IntLinError("entries do not match the declared shape")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], ncols: int | None = None) -> "IntMatrix":
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if ncols is None:
            if not rows:
                raise IntLinError("ncols required for a matrix without rows")
            ncols = len(rows[0])
        return cls(len(rows), ncols, rows)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "IntMatrix":
        return cls(nrows, ncols, tuple((0,) * ncols for _ in range(nrows)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def rows(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.ncols, self.nrows,
                         tuple(tuple(self.entries[i][j] for i in range(self.nrows))
                               for j in range(self.ncols)))

    T = property(transpose)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise IntLinError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.transpose().entries
        return IntMatrix(self.nrows, other.ncols,
                         tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols)
                               for r in self.entries))

    def apply(self, v: Sequence[int]) -> Vector:
        """Matrix times column vector."""
        if len(v) != self.ncols:
            raise IntLinError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.entries)

    def det(self) -> int:
        if self.nrows != self.ncols:
            raise IntLinError("determinant of a non-square matrix")
        return _bareiss_det([list(r) for r in self.entries])

    def is_unimodular(self) -> bool:
        return self.nrows == self.ncols and abs(self.det()) == 1


@dataclass(frozen=True)
class LatticeSubspace:
    """Sublattice of Z^ambient_rank spanned by the independent rows of ``basis``."""

    ambient_rank: int
    basis: tuple[Vector, ...]

    def __post_init__(self):
        if any(len(b) != self.ambient_rank for b in self.basis):
            raise IntLinError("basis vector has the wrong length")

    @classmethod
    def span(cls, vectors: Iterable[Sequence[int]], ambient_rank: int) -> "LatticeSubspace":
        """Lattice generated by arbitrary (possibly dependent) vectors."""
        return cls(ambient_rank, tuple(hermite_rows(vectors, ambient_rank)))

    @property
    def rank(self) -> int:
        return len(self.basis)

    def matrix(self) -> IntMatrix:
        return IntMatrix(self.rank, self.ambient_rank, self.basis)

    def contains(self, v: Sequence[int]) -> bool:
        return not any(normal_form_in_quotient(v, self))


def _bareiss_det(a: list[list[int]]) -> int:
    n = len(a)
    if n == 0:
        return 1
    a = [row[:] for row in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank_q(rows: Sequence[Sequence[int]]) -> int:
    """Rank over the rationals."""
    return len(hermite_rows(rows, len(rows[0]) if rows else 0))


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

def smith_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(u, d, v)`` with ``u @ m @ v == d``.

    ``u`` and ``v`` are unimodular, ``d`` is diagonal with non-negative
    entries forming a divisibility chain ``d_1 | d_2 | ...``.
    """
    u, d, v, _ = _smith(m)
    return u, d, v


def _smith(m: IntMatrix):
    """Smith form that also tracks ``v^{-1}`` (needed for saturation)."""
    r, c = m.shape
    a = m.rows()
    u = [[int(i == j) for j in range(r)] for i in range(r)]
    v = [[int(i == j) for j in range(c)] for i in range(c)]
    vinv = [[int(i == j) for j in range(c)] for i in range(c)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]
        vinv[i], vinv[j] = vinv[j], vinv[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        if q:
            ad, as_ = a[dst], a[src]
            for k in range(c):
                ad[k] += q * as_[k]
            ud, us = u[dst], u[src]
            for k in range(r):
                ud[k] += q * us[k]

    def add_col(dst, src, q):
        # col_dst += q * col_src; v^{-1} gets the inverse row operation
        if q:
            for row in a:
                row[dst] += q * row[src]
            for row in v:
                row[dst] += q * row[src]
            vs, vd = vinv[src], vinv[dst]
            for k in range(c):
                vs[k] -= q * vd[k]

    for t in range(min(r, c)):
        while True:
            best = None
            for i in range(t, r):
                row = a[i]
                for j in range(t, c):
                    x = row[j]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, j)
            if best is None:
                break
            _, pi, pj = best
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = a[t][t]
            dirty = False
            for i in range(t + 1, r):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, c):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    dirty = dirty or a[t][j] != 0
            if dirty:
                continue
            # pivot row/column clear; enforce divisibility of the remainder
            bad = None
            for i in range(t + 1, r):
                for j in range(t + 1, c):
                    if a[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if t < r and t < c and a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]

    return (IntMatrix.from_rows(u, r), IntMatrix.from_rows(a, c),
            IntMatrix.from_rows(v, c), IntMatrix.from_rows(vinv, c))


def invariant_factors(m: IntMatrix) -> list[int]:
    """Non-zero diagonal entries of the Smith form."""
    _, d, _ = smith_normal_form(m)
    return [d[i, i] for i in range(min(d.shape)) if d[i, i]]


# ---------------------------------------------------------------------------
# Hermite normal form
# ---------------------------------------------------------------------------

def hermite_rows(vectors: Iterable[Sequence[int]], ncols: int) -> list[Vector]:
    """Row-style Hermite basis of the lattice spanned by ``vectors``.

    Zero rows are dropped; the result is the canonical basis of the row
    lattice (upper echelon, positive pivots, entries above each pivot
    reduced into ``[0, pivot)``).
    """
    rows = [list(v) for v in vectors if any(v)]
    for v in rows:
        if len(v) != ncols:
            raise IntLinError("vector length mismatch")
    out: list[list[int]] = []
    col = 0
    while rows and col < ncols:
        active = [r for r in rows if r[col]]
        if not active:
            col += 1
            continue
        rest = [r for r in rows if not r[col]]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            p = active[0]
            pv = p[col]
            nxt = [p]
            for r in active[1:]:
                q = r[col] // pv
                for k in range(col, ncols):
                    r[k] -= q * p[k]
                if r[col]:
                    nxt.append(r)
                elif any(r):
                    rest.append(r)
            active = nxt
        p = active[0]
        if p[col] < 0:
            p = [-x for x in p]
        out.append(p)
        rows = rest
        col += 1
    # reduce entries above pivots
    pivots = [next(k for k, x in enumerate(r) if x) for r in out]
    for i in range(len(out)):
        pc, pv = pivots[i], out[i][pivots[i]]
        for j in range(i):
            q = out[j][pc] // pv
            if q:
                out[j] = [a - q * b for a, b in zip(out[j], out[i])]
    return [tuple(r) for r in out]


def hermite_normal_form(m: IntMatrix) -> IntMatrix:
    """Hermite basis of the row lattice of ``m`` as a matrix (zero rows dropped)."""
    return IntMatrix.from_rows(hermite_rows(m.entries, m.ncols), m.ncols)


def normal_form_in_quotient(v: Sequence[int], relations: LatticeSubspace) -> Vector:
    """Canonical representative of ``v`` modulo the relation lattice.

    Two vectors give the same output iff their difference is a relation.
    """
    if len(v) != relations.ambient_rank:
        raise IntLinError("vector length mismatch")
    out = list(v)
    for row in hermite_rows(relations.basis, relations.ambient_rank):
        pc = next(k for k, x in enumerate(row) if x)
        q = out[pc] // row[pc]
        if q:
            out = [a - q * b for a, b in zip(out, row)]
    return tuple(out)


# ---------------------------------------------------------------------------
# kernels, saturation, basis completion
# ---------------------------------------------------------------------------

def integer_kernel(m: IntMatrix) -> LatticeSubspace:
    """Saturated basis of ``{x in Z^ncols : m x = 0}`` in Hermite form."""
    basis = kernel_basis(m.entries, m.ncols)
    return LatticeSubspace(m.ncols, tuple(hermite_rows(basis, m.ncols)))


def kernel_basis(equations: Sequence[Sequence[int]] | Sequence[dict[int, int]],
                 nvars: int) -> list[Vector]:
    """Saturated integer basis of the solution lattice of ``equations``.

    ``equations`` are dense rows or sparse ``{column: coefficient}`` dicts.
    Unknowns with a unit coefficient are eliminated first by sparse
    substitution; the remaining system is solved densely by unimodular row
    reduction, then the eliminated unknowns are back-substituted.  The
    result is deterministic but not put into Hermite form.
    """
    rows: list[dict[int, int]] = []
    for eq in equations:
        if isinstance(eq, dict):
            row = {k: x for k, x in eq.items() if x}
        else:
            if len(eq) != nvars:
                raise IntLinError("equation length mismatch")
            row = {k: x for k, x in enumerate(eq) if x}
        if row:
            rows.append(row)

    eliminated, rows = _eliminate_unit_pivots(rows)
    elim_cols = {c for c, _ in eliminated}
    free = [k for k in range(nvars) if k not in elim_cols]
    involved = sorted({k for row in rows for k in row})
    untouched = [k for k in free if k not in set(involved)]

    partial: list[dict[int, int]] = [{k: 1} for k in untouched]
    if involved:
        pos = {k: i for i, k in enumerate(involved)}
        dense = [[0] * len(rows) for _ in involved]
        for j, row in enumerate(rows):
            for k, x in row.items():
                dense[pos[k]][j] = x
        for vec in _dense_left_kernel(dense):
            partial.append({involved[i]: x for i, x in enumerate(vec) if x})
    partial.sort(key=lambda s: min(s))

    out = []
    for sol in partial:
        # back-substitute in reverse elimination order
        for c, expr in reversed(eliminated):
            val = sum(coef * sol.get(k, 0) for k, coef in expr.items())
            if val:
                sol[c] = val
        vec = [0] * nvars
        for k, x in sol.items():
            vec[k] = x
        out.append(tuple(vec))
    return out


def _eliminate_unit_pivots(rows: list[dict[int, int]]):
    """Repeatedly solve a ±1-coefficient unknown and substitute it away.

    Returns ``(eliminated, remaining_rows)`` where ``eliminated`` is a list of
    ``(column, expression)`` with ``x_column = sum(expression[k] * x_k)``.
    """
    from ._kernels import eliminate_unit_pivots
    return eliminate_unit_pivots(rows)


def _dense_left_kernel(a: list[list[int]]) -> list[Vector]:
    """Basis of ``{y : y^T a = 0}`` from unimodular row reduction of ``[a | I]``."""
    n = len(a)
    ncols = len(a[0]) if a else 0
    work = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(a)]
    top = 0
    for col in range(ncols):
        while True:
            best = None
            for i in range(top, n):
                x = work[i][col]
                if x and (best is None or abs(x) < abs(work[best][col])):
                    best = i
            if best is None:
                break
            work[top], work[best] = work[best], work[top]
            p = work[top]
            pv = p[col]
            done = True
            for i in range(top + 1, n):
                x = work[i][col]
                if x:
                    q = x // pv
                    r = work[i]
                    for k in range(col, len(r)):
                        r[k] -= q * p[k]
                    if r[col]:
                        done = False
            if done:
                top += 1
                break
        if top == n:
            break
    return [tuple(work[i][ncols:]) for i in range(top, n)]


def saturate(s: LatticeSubspace) -> LatticeSubspace:
    """Basis of ``span_Q(s) ∩ Z^n`` in Hermite form."""
    if s.rank == 0:
        return s
    _, d, _, vinv = _smith(s.matrix())
    k = sum(1 for i in range(min(d.shape)) if d[i, i])
    if k != s.rank:
        raise IntLinError("basis vectors are linearly dependent")
    return LatticeSubspace(s.ambient_rank, tuple(hermite_rows(vinv.entries[:k], s.ambient_rank)))


def is_saturated(s: LatticeSubspace) -> bool:
    return all(x == 1 for x in invariant_factors(s.matrix())) if s.rank else True


def lattice_index(s: LatticeSubspace) -> int:
    """Index of ``s`` in its saturation."""
    out = 1
    for x in invariant_factors(s.matrix()):
        out *= x
    return out


def extend_to_basis(s: LatticeSubspace) -> IntMatrix:
    """Unimodular matrix whose first ``rank(s)`` rows are the basis of ``s``.

    Raises :class:`IntLinError` if ``s`` is not saturated.
    """
    n = s.ambient_rank
    if s.rank == 0:
        return IntMatrix.identity(n)
    if not is_saturated(s):
        raise IntLinError("cannot extend a non-saturated lattice to a basis")
    _, _, _, vinv = _smith(s.matrix())
    complement = list(vinv.entries[s.rank:])
    # canonical complement: Hermite-reduce and clear it against s
    complement = hermite_rows(complement, n)
    rows = list(s.basis) + complement
    out = IntMatrix.from_rows(rows, n)
    assert out.is_unimodular()
    return out


def solve_unimodular(u: IntMatrix, v: Sequence[int]) -> Vector:
    """Coordinates ``c`` with ``c @ u == v`` for a unimodular ``u``."""
    n = u.nrows
    # Bareiss-free: solve via adjugate-like elimination on the transpose
    aug = [list(u.transpose().entries[i]) + [v[i]] for i in range(n)]
    for col in range(n):
        piv = min((i for i in range(col, n) if aug[i][col]), key=lambda i: (abs(aug[i][col]), i))
        aug[col], aug[piv] = aug[piv], aug[col]
        while any(aug[i][col] for i in range(col + 1, n)):
            for i in range(col + 1, n):
                if aug[i][col]:
                    q = aug[i][col] // aug[col][col]
                    aug[i] = [a - q * b for a, b in zip(aug[i], aug[col])]
            piv = min((i for i in range(col, n) if aug[i][col]), key=lambda i: (abs(aug[i][col]), i))
            aug[col], aug[piv] = aug[piv], aug[col]
    c = [0] * n
    for i in reversed(range(n)):
        rhs = aug[i][n] - sum(aug[i][j] * c[j] for j in range(i + 1, n))
        if rhs % aug[i][i]:
            raise IntLinError("matrix is not unimodular")
        c[i] = rhs // aug[i][i]
    return tuple(c)


def primitive(v: Sequence[int]) -> Vector:
    """Divide ``v`` by the gcd of its entries."""
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        return tuple(v)
    return tuple(x // g for x in v)
