"""The truncated Lazard ring and specializations of the universal law.

``build_lazard(D)`` presents each graded piece ``L_{-k}`` (``k <= D``) as the
free abelian group on monomials in ``A_{i,j}`` (``i <= j``, weight
``i + j - 1``) modulo the span of ``relation * monomial`` products, where the
relations are the coefficients of ``F(F(u,v),w) - F(u,F(v,w))`` expanded over
``Z[A]``.  Commutativity is built into the variable set; the unit axiom holds
because ``F`` has no pure powers beyond ``u + v``.

The relation lattice of every piece is put in Hermite form; coordinates in
the quotient are read off the non-pivot monomials when all pivots are 1, and
through a unimodular basis completion otherwise.  A piece with torsion raises
:class:`LazardTorsionError` (the universal ring is torsion-free, so this only
fires on a broken relation generator).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from . import intlin
from .fgl import Coeff, GradedRing, GradedSeries, SeriesError

Poly = dict  # {exponent tuple over the A-variables: int}
Factor = tuple[int, int]


class LazardTorsionError(ArithmeticError):
    def __init__(self, degree: int, factors: Sequence[int]):
        super().__init__(f"graded piece of degree -{degree} has torsion invariants {list(factors)}")
        self.degree = degree
        self.factors = list(factors)


class GradedRank(NamedTuple):
    rank: int
    torsion: tuple[int, ...]


# ---------------------------------------------------------------------------
# polynomial arithmetic over Z[A] (independent of the structure-constant path)
# ---------------------------------------------------------------------------

def _padd(p: Poly, q: Poly, c: int = 1) -> Poly:
    out = dict(p)
    for m, x in q.items():
        y = out.get(m, 0) + c * x
        if y:
            out[m] = y
        else:
            out.pop(m, None)
    return out


def _pmul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, x in p.items():
        for m2, y in q.items():
            m = tuple(a + b for a, b in zip(m1, m2))
            z = out.get(m, 0) + x * y
            if z:
                out[m] = z
            else:
                out.pop(m, None)
    return out


def _smul(f: dict, g: dict, top: int) -> dict:
    """Product of series in (u, v, w) with Z[A] coefficients, truncated."""
    out: dict = {}
    for e1, p in f.items():
        s1 = sum(e1)
        for e2, q in g.items():
            if s1 + sum(e2) > top:
                continue
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = _padd(out.get(e, {}), _pmul(p, q))
            if not out[e]:
                del out[e]
    return out


def _sadd(f: dict, g: dict, c: int = 1) -> dict:
    out = dict(f)
    for e, q in g.items():
        r = _padd(out.get(e, {}), q, c)
        if r:
            out[e] = r
        else:
            out.pop(e, None)
    return out


def lazard_variables(bound: int) -> list[Factor]:
    """``A_{i,j}`` with ``i <= j`` and weight ``i + j - 1 <= bound``, ordered by (i+j, i)."""
    return sorted(((i, j) for i in range(1, bound + 1) for j in range(i, bound + 2 - i)),
                  key=lambda ij: (ij[0] + ij[1], ij[0]))


def weight(factor: Factor) -> int:
    return factor[0] + factor[1] - 1


def _formal_sum_expansion(x: dict, y: dict, var_index: Mapping[Factor, int], nv: int, top: int,
                          symmetric: bool = True) -> dict:
    """``F(x, y)`` over Z[A] with ``F = u + v + sum A_{i,j} u^i v^j``.

    With ``symmetric=False`` the variable of ``A_{j,i}`` is looked up
    separately (used to test the commutativity identification).
    """
    out = _sadd(x, y)
    xp = [{(0,) * len(next(iter(x))): {(0,) * nv: 1}}] if x else []
    yp = [{(0,) * len(next(iter(y))): {(0,) * nv: 1}}] if y else []
    if not xp or not yp:
        return out
    for _ in range(top):
        xp.append(_smul(xp[-1], x, top))
        yp.append(_smul(yp[-1], y, top))
    for i in range(1, top):
        for j in range(1, top + 1 - i):
            key = (i, j) if (symmetric and i <= j) or not symmetric else (j, i)
            if key not in var_index:
                continue
            mono = [0] * nv
            mono[var_index[key]] = 1
            coeff = {tuple(mono): 1}
            prod = _smul(xp[i], yp[j], top)
            term = {e: _pmul(p, coeff) for e, p in prod.items()}
            out = _sadd(out, term)
    return out


def associativity_residual(bound: int, top: int | None = None) -> dict[tuple[int, int, int], Poly]:
    """Coefficients of ``F(F(u,v),w) - F(u,F(v,w))`` up to total degree ``top``.

    Returns ``{(a, b, c): polynomial}`` over the variables of
    :func:`lazard_variables`; ``top`` defaults to ``bound + 1``.
    """
    top = bound + 1 if top is None else top
    vars_ = lazard_variables(bound)
    idx = {v: n for n, v in enumerate(vars_)}
    nv = len(vars_)
    c1 = {(0,) * nv: 1}
    u, v, w = {(1, 0, 0): c1}, {(0, 1, 0): c1}, {(0, 0, 1): c1}
    lhs = _formal_sum_expansion(_formal_sum_expansion(u, v, idx, nv, top), w, idx, nv, top)
    rhs = _formal_sum_expansion(u, _formal_sum_expansion(v, w, idx, nv, top), idx, nv, top)
    return _sadd(lhs, rhs, -1)


# ---------------------------------------------------------------------------
# the ring
# ---------------------------------------------------------------------------

def _monomials_of_weight(vars_: list[Factor], k: int) -> list[tuple[int, ...]]:
    """Exponent vectors of weight ``k``, in graded-lex order (largest first)."""
    nv = len(vars_)
    ws = [weight(v) for v in vars_]
    out = []

    def rec(pos, remaining, acc):
        if pos == nv:
            if remaining == 0:
                out.append(tuple(acc))
            return
        for e in range(remaining // ws[pos], -1, -1):
            acc.append(e)
            rec(pos + 1, remaining - e * ws[pos], acc)
            acc.pop()

    rec(0, k, [])
    return out


def _format_monomial(vars_: list[Factor], e: Sequence[int]) -> str:
    parts = []
    for (i, j), x in zip(vars_, e):
        if x:
            parts.append(f"a{i}{j}" + (f"^{x}" if x > 1 else ""))
    return "*".join(parts) if parts else "1"


def _format_poly(vars_: list[Factor], p: Poly) -> str:
    if not p:
        return "0"
    parts = []
    for m in sorted(p, reverse=True):
        x, mono = p[m], _format_monomial(vars_, m)
        if mono == "1":
            parts.append(str(x))
        elif x == 1:
            parts.append(mono)
        elif x == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{x}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


@dataclass
class Piece:
    """Presentation of one graded piece ``L_{-k}``."""

    degree: int
    monomials: list[tuple[int, ...]]
    relations: list[tuple[int, ...]]  # Hermite basis of the relation lattice
    basis: list[tuple[int, ...]]  # lifts of the quotient basis (monomial coordinates)
    pivots: list[int]
    _complement: intlin.IntMatrix | None = None  # used when some pivot is not 1

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coordinates(self, v: Sequence[int]) -> Coeff:
        if self._complement is None:
            red = intlin.normal_form_in_quotient(v, intlin.LatticeSubspace(len(self.monomials), tuple(self.relations)))
            piv = set(self.pivots)
            return tuple(x for k, x in enumerate(red) if k not in piv)
        c = intlin.solve_unimodular(self._complement, v)
        return c[len(self.relations):]


class LazardRing(GradedRing):
    """The Lazard ring truncated at degree ``-D`` as a :class:`GradedRing`."""

    def __init__(self, bound: int):
        if bound < 1:
            raise ValueError("truncation bound must be at least 1")
        self.bound = bound
        self.variables = lazard_variables(bound)
        self.var_index = {v: n for n, v in enumerate(self.variables)}
        residual = associativity_residual(bound)
        self.primitive_relations: dict[int, list[Poly]] = {}
        for (a, b, c), p in sorted(residual.items()):
            self.primitive_relations.setdefault(a + b + c - 1, []).append(p)

        self.pieces: list[Piece] = []
        for k in range(bound + 1):
            monos = _monomials_of_weight(self.variables, k)
            pos = {m: n for n, m in enumerate(monos)}
            gens = []
            for j, rels in sorted(self.primitive_relations.items()):
                if j > k:
                    continue
                for m in _monomials_of_weight(self.variables, k - j):
                    for rel in rels:
                        vec = [0] * len(monos)
                        for rm, x in rel.items():
                            vec[pos[tuple(a + b for a, b in zip(rm, m))]] += x
                        gens.append(vec)
            hnf = intlin.hermite_rows(gens, len(monos))
            if hnf:
                tors = [x for x in intlin.invariant_factors(intlin.IntMatrix.from_rows(hnf)) if x != 1]
                if tors:
                    raise LazardTorsionError(k, tors)
            pivots = [next(n for n, x in enumerate(r) if x) for r in hnf]
            if all(r[p] == 1 for r, p in zip(hnf, pivots)):
                basis = [tuple(int(n == m) for n in range(len(monos)))
                         for m in range(len(monos)) if m not in set(pivots)]
                self.pieces.append(Piece(k, monos, hnf, basis, pivots))
            else:
                full = intlin.extend_to_basis(intlin.LatticeSubspace(len(monos), tuple(hnf)))
                basis = list(full.entries[len(hnf):])
                self.pieces.append(Piece(k, monos, hnf, basis, pivots, full))

        ranks = tuple(p.rank for p in self.pieces)
        labels = tuple(tuple(self._format_vector(k, b) for b in p.basis) for k, p in enumerate(self.pieces))
        products = {}
        for k in range(1, bound + 1):
            for l in range(1, bound + 1 - k):
                products[(k, l)] = [[self._coords_of_product(k, b1, l, b2) for b2 in self.pieces[l].basis]
                                    for b1 in self.pieces[k].basis]
        fgl = {}
        for i in range(1, bound + 1):
            for j in range(1, bound + 2 - i):
                fgl[(i, j)] = self.normal_form({((min(i, j), max(i, j)),): 1})[1]
        super().__init__("universal", bound, ranks, products, fgl, labels)

    # -- presentation helpers --------------------------------------------
    def _vector_to_poly(self, k: int, v: Sequence[int]) -> Poly:
        return {m: x for m, x in zip(self.pieces[k].monomials, v) if x}

    def _format_vector(self, k: int, v: Sequence[int]) -> str:
        return _format_poly(self.variables, self._vector_to_poly(k, v))

    def _coords_of_product(self, k, v1, l, v2) -> Coeff:
        p = _pmul(self._vector_to_poly(k, v1), self._vector_to_poly(l, v2))
        return self._poly_coordinates(k + l, p)

    def _poly_coordinates(self, k: int, p: Poly) -> Coeff:
        piece = self.pieces[k]
        pos = {m: n for n, m in enumerate(piece.monomials)}
        vec = [0] * len(piece.monomials)
        for m, x in p.items():
            vec[pos[m]] += x
        return piece.coordinates(vec)

    def lift(self, k: int, coords: Sequence[int]) -> Poly:
        """Polynomial in ``A_{i,j}`` representing an element of piece ``k``."""
        piece = self.pieces[k]
        vec = [0] * len(piece.monomials)
        for c, b in zip(coords, piece.basis):
            for n, x in enumerate(b):
                vec[n] += c * x
        return self._vector_to_poly(k, vec)

    def poly_from_factors(self, p: Mapping[Sequence[Factor], int]) -> Poly:
        """Turn ``{(A-factor, ...): coeff}`` into an exponent-keyed polynomial.

        ``A_{j,i}`` with ``j > i`` is identified with ``A_{i,j}``.
        """
        out: Poly = {}
        for factors, x in p.items():
            e = [0] * len(self.variables)
            for i, j in factors:
                key = (min(i, j), max(i, j))
                if key not in self.var_index:
                    raise SeriesError(f"A_{{{i},{j}}} is beyond the truncation bound")
                e[self.var_index[key]] += 1
            out = _padd(out, {tuple(e): x})
        return out

    def poly_weight(self, p: Poly) -> int:
        ws = {sum(x * weight(v) for x, v in zip(m, self.variables)) for m in p}
        if len(ws) > 1:
            raise SeriesError("polynomial is not homogeneous")
        return ws.pop() if ws else 0

    def normal_form(self, p: Mapping[Sequence[Factor], int] | Poly) -> tuple[int, Coeff]:
        """``(k, coordinates)`` of a homogeneous polynomial in piece ``k``.

        Accepts either ``{(A-factors...): coeff}`` or an exponent-keyed
        polynomial over :attr:`variables`.
        """
        if p and not all(isinstance(m, tuple) and all(isinstance(x, int) for x in m)
                         and len(m) == len(self.variables) for m in p):
            p = self.poly_from_factors(p)
        p = {m: x for m, x in p.items() if x}
        k = self.poly_weight(p)
        if k > self.bound:
            raise SeriesError(f"degree -{k} is beyond the truncation bound")
        return k, self._poly_coordinates(k, p)

    def dump(self) -> dict:
        """Per-degree monomial basis and Hermite relation matrix."""
        return {
            "bound": self.bound,
            "variables": [f"a{i}{j}" for i, j in self.variables],
            "pieces": [
                {"degree": -p.degree,
                 "monomials": [_format_monomial(self.variables, m) for m in p.monomials],
                 "relations": [list(r) for r in p.relations],
                 "basis": [self._format_vector(p.degree, b) for b in p.basis],
                 "rank": p.rank}
                for p in self.pieces],
        }

    def dumps(self) -> str:
        return json.dumps(self.dump(), sort_keys=True)


def build_lazard(bound: int) -> LazardRing:
    return _build_cached(bound)


_CACHE: dict[int, LazardRing] = {}


def _build_cached(bound: int) -> LazardRing:
    if bound not in _CACHE:
        _CACHE[bound] = LazardRing(bound)
    return _CACHE[bound]


def lazard_normal_form(ring: LazardRing, p) -> tuple[int, Coeff]:
    return ring.normal_form(p)


def graded_rank(ring: LazardRing, k: int) -> GradedRank:
    if not 0 <= k <= ring.bound:
        raise ValueError(f"degree -{k} outside 0..-{ring.bound}")
    # torsion would have raised at construction time
    return GradedRank(ring.pieces[k].rank, ())


def axiom_residuals(ring: LazardRing, top: int | None = None) -> dict[str, dict]:
    """Normal forms of the three axiom residuals, keyed by monomial; all should be empty.

    The expansion is done over ``Z[A_{i,j}]`` with *both* ``A_{i,j}`` and
    ``A_{j,i}`` present, so commutativity is tested through the
    identification in :meth:`LazardRing.normal_form` rather than assumed.
    """
    top = ring.bound + 1 if top is None else top
    D = ring.bound
    full_vars = sorted(((i, j) for i in range(1, D + 1) for j in range(1, D + 2 - i)),
                       key=lambda ij: (ij[0] + ij[1], ij[0], ij[1]))
    idx = {v: n for n, v in enumerate(full_vars)}
    nv = len(full_vars)
    c1 = {(0,) * nv: 1}

    def to_factors(p: Poly) -> dict:
        out = {}
        for m, x in p.items():
            fs = tuple(f for f, e in zip(full_vars, m) for _ in range(e))
            out[fs] = out.get(fs, 0) + x
        return out

    def nonzero_normal_forms(series: dict) -> dict:
        bad = {}
        for e, p in series.items():
            k, coords = ring.normal_form(to_factors(p)) if p else (0, ())
            if any(coords):
                bad[e] = coords
        return bad

    u2, v2 = {(1, 0): c1}, {(0, 1): c1}
    unit = _sadd(_formal_sum_expansion(u2, {}, idx, nv, top, symmetric=False), u2, -1)
    unit2 = _sadd(_formal_sum_expansion({}, u2, idx, nv, top, symmetric=False), u2, -1)
    comm = _sadd(_formal_sum_expansion(u2, v2, idx, nv, top, symmetric=False),
                 _formal_sum_expansion(v2, u2, idx, nv, top, symmetric=False), -1)
    u, v, w = {(1, 0, 0): c1}, {(0, 1, 0): c1}, {(0, 0, 1): c1}
    assoc = _sadd(
        _formal_sum_expansion(_formal_sum_expansion(u, v, idx, nv, top, False), w, idx, nv, top, False),
        _formal_sum_expansion(u, _formal_sum_expansion(v, w, idx, nv, top, False), idx, nv, top, False), -1)
    return {"unit": {**nonzero_normal_forms(unit), **nonzero_normal_forms(unit2)},
            "commutativity": nonzero_normal_forms(comm),
            "associativity": nonzero_normal_forms(assoc)}


# ---------------------------------------------------------------------------
# specializations
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Specialization:
    """Ring map out of the Lazard ring, fixed by the images of the ``A_{i,j}``."""

    source: LazardRing
    target: GradedRing
    images: dict[Factor, Coeff]

    def __post_init__(self):
        if self.source.bound != self.target.bound:
            raise SeriesError("truncation bounds differ")
        self._matrices = [self._piece_matrix(k) for k in range(self.source.bound + 1)]

    def _evaluate_poly(self, k: int, p: Poly) -> Coeff:
        tgt = self.target
        out = [0] * tgt.rank(k)
        for m, x in p.items():
            val, vk = (1,), 0
            for (f, e) in zip(self.source.variables, m):
                for _ in range(e):
                    img = self.images.get(f, (0,) * tgt.rank(weight(f)))
                    val = tgt.multiply(vk, val, weight(f), img)
                    vk += weight(f)
            for n, y in enumerate(val):
                out[n] += x * y
        return tuple(out)

    def _piece_matrix(self, k: int) -> list[Coeff]:
        return [self._evaluate_poly(k, self.source.lift(k, tuple(int(i == j) for j in range(self.source.rank(k)))))
                for i in range(self.source.rank(k))]

    def apply_element(self, k: int, coords: Sequence[int]) -> Coeff:
        mat = self._matrices[k]
        out = [0] * self.target.rank(k)
        for c, row in zip(coords, mat):
            if c:
                for n, y in enumerate(row):
                    out[n] += c * y
        return tuple(out)


def specialize_additive(ring: LazardRing) -> Specialization:
    """All ``A_{i,j} -> 0``: the additive law over Z."""
    return Specialization(ring, GradedRing.additive(ring.bound), {})


def specialize_multiplicative(ring: LazardRing) -> Specialization:
    """``A_{1,1} -> -beta``, others 0: ``F = u + v - beta u v`` over ``Z[beta]``."""
    return Specialization(ring, GradedRing.multiplicative(ring.bound), {(1, 1): (-1,)})


def apply_specialization(s: Specialization, x):
    """Push an element ``(k, coords)`` or a :class:`GradedSeries` to the target ring."""
    if isinstance(x, GradedSeries):
        if x.ring is not s.source:
            raise SeriesError("series is not over the specialization's source ring")
        terms = {e: s.apply_element(sum(e) - x.degree, c) for e, c in x.terms.items()}
        return GradedSeries.make(s.target, x.nvars, x.degree, terms)
    k, coords = x
    if k > s.source.bound:
        raise SeriesError("element beyond the truncation bound")
    return k, s.apply_element(k, coords)


def partition_count(k: int) -> int:
    """Number of partitions of ``k`` (the expected rank of ``L_{-k}``)."""
    if k < 0:
        return 0
    p = [1] + [0] * k
    for part in range(1, k + 1):
        for n in range(part, k + 1):
            p[n] += p[n - part]
    return p[k]
