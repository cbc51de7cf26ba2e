"""The sheaf of piecewise graded power series on a fan.

Each cone ``sigma`` gets the stalk ``S_sigma``: graded power series in
``dim sigma`` variables over a coefficient ring, the variables being dual to
a fixed basis of ``N_sigma = span(sigma) ∩ N``.  For ``N_tau ⊆ N_sigma`` the
restriction ``S_sigma -> S_tau`` sends ``t_i`` to the formal linear
combination ``[a_i1] u_1 +_F ... +_F [a_il] u_l`` where ``a_ik`` is the
``i``-th coordinate of the ``k``-th basis vector of ``N_tau``.

Global sections in a fixed degree form a free abelian group, computed as the
integer kernel of the pairwise compatibility system over maximal cones.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from . import intlin
from .fan import Cone, ConeKey, Fan, FanError, SubdivisionMap, star_maximal
from .fgl import (GradedRing, GradedSeries, MonomialImages, formal_linear_combination,
                  series_mul, variables)


class SheafError(ValueError):
    pass


# ---------------------------------------------------------------------------
# stalks and restriction maps
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Stalk:
    cone: Cone
    ring: GradedRing
    basis: intlin.IntMatrix  # first dim rows: basis of N_sigma

    @property
    def nvars(self) -> int:
        return self.cone.dim

    def lattice_coordinates(self, v: Sequence[int]) -> tuple[int, ...]:
        """Coordinates of a vector of ``N_sigma`` in the chosen basis."""
        c = intlin.solve_unimodular(self.basis, v)
        if any(c[self.nvars:]):
            raise SheafError(f"{list(v)} is not in the span of {self.cone}")
        return c[:self.nvars]

    def variables(self) -> list[GradedSeries]:
        return variables(self.ring, self.nvars)


_STALKS: dict = {}


def build_stalk(cone: Cone, ring: GradedRing) -> Stalk:
    key = (cone, id(ring))
    st = _STALKS.get(key)
    if st is None or st.ring is not ring:
        st = _STALKS[key] = Stalk(cone, ring, cone.lattice_basis())
    return st


@dataclass(eq=False)
class RestrictionMap:
    """Ring map ``S_source -> S_target`` for ``N_target ⊆ N_source``."""

    source: Stalk
    target: Stalk
    matrix: tuple[tuple[int, ...], ...]  # matrix[i][k] = i-th coordinate of k-th target basis vector
    images: list[GradedSeries]
    _linear: dict = field(default_factory=dict, repr=False)

    @cached_property
    def monomials(self) -> MonomialImages:
        return MonomialImages(self.source.ring, self.images, self.target.nvars)

    def __call__(self, f: GradedSeries) -> GradedSeries:
        if f.ring is not self.source.ring or f.nvars != self.source.nvars:
            raise SheafError("series does not live in the source stalk")
        return self.monomials.apply(f)

    def linear_map(self, degree: int) -> list[dict[int, int]]:
        """Columns (sparse, target coordinates) of the map in one degree."""
        got = self._linear.get(degree)
        if got is None:
            ring = self.source.ring
            src = stalk_coordinates(ring, self.source.nvars, degree)
            tgt_index = coordinate_index(ring, self.target.nvars, degree)
            cols = []
            for (e, j) in src:
                m = self.monomials.monomial(e)
                k = sum(e) - degree
                col: dict[int, int] = {}
                if not m.is_zero():
                    unit = tuple(int(i == j) for i in range(ring.ranks[k]))
                    img = series_mul(_const(ring, self.target.nvars, k, unit), m)
                    for e2, c in img.terms.items():
                        for j2, x in enumerate(c):
                            if x:
                                col[tgt_index[(e2, j2)]] = x
                cols.append(col)
            got = self._linear[degree] = cols
        return got


def _const(ring, nvars, piece, value):
    return GradedSeries.make(ring, nvars, -piece, {(0,) * nvars: value})


_RESTRICTIONS: dict = {}


def lattice_restriction(source: Cone, target: Cone, ring: GradedRing) -> RestrictionMap:
    """Restriction along ``span(target) ∩ N ⊆ span(source) ∩ N``."""
    key = (source, target, id(ring))
    got = _RESTRICTIONS.get(key)
    if got is not None and got.source.ring is ring:
        return got
    s, t = build_stalk(source, ring), build_stalk(target, ring)
    tb = [t.basis.entries[k] for k in range(t.nvars)]
    try:
        cols = [s.lattice_coordinates(b) for b in tb]
    except SheafError as exc:
        raise SheafError(f"{target} does not lie in the span of {source}") from exc
    matrix = tuple(tuple(cols[k][i] for k in range(t.nvars)) for i in range(s.nvars))
    us = t.variables()
    images = [formal_linear_combination(list(row), us, ring=ring, nvars=t.nvars) for row in matrix]
    got = _RESTRICTIONS[key] = RestrictionMap(s, t, matrix, images)
    return got


def restriction(sigma: Cone, tau: Cone, ring: GradedRing) -> RestrictionMap:
    """Face restriction ``S_sigma -> S_tau``; ``tau`` must be a face of ``sigma``."""
    if tau.rays not in sigma.face_ray_sets():
        raise SheafError(f"{tau} is not a face of {sigma}")
    return lattice_restriction(sigma, tau, ring)


# ---------------------------------------------------------------------------
# coordinates of a stalk in one degree
# ---------------------------------------------------------------------------

_COORDS: dict = {}


def stalk_coordinates(ring: GradedRing, nvars: int, degree: int) -> list[tuple[tuple[int, ...], int]]:
    """``(exponent, basis index)`` pairs spanning degree ``degree`` of a stalk.

    Exponents in graded-lex order, then coefficient basis index.
    """
    key = (id(ring), ring.ranks, nvars, degree)
    got = _COORDS.get(key)
    if got is None:
        out = []
        for total in range(ring.bound + 1):
            k = total - degree
            if not 0 <= k <= ring.bound or not ring.ranks[k]:
                continue
            for e in _exponents(nvars, total):
                for j in range(ring.ranks[k]):
                    out.append((e, j))
        got = _COORDS[key] = out
    return got


def coordinate_index(ring, nvars, degree) -> dict:
    return {c: i for i, c in enumerate(stalk_coordinates(ring, nvars, degree))}


def _exponents(nvars: int, total: int) -> list[tuple[int, ...]]:
    if nvars == 0:
        return [()] if total == 0 else []
    out = []
    for first in range(total, -1, -1):
        for rest in _exponents(nvars - 1, total - first):
            out.append((first,) + rest)
    return out


def series_to_vector(f: GradedSeries, degree: int | None = None) -> list[int]:
    degree = f.degree if degree is None else degree
    coords = stalk_coordinates(f.ring, f.nvars, degree)
    return [f.terms.get(e, ())[j] if e in f.terms else 0 for e, j in coords]


def vector_to_series(ring: GradedRing, nvars: int, degree: int, vec: Sequence[int]) -> GradedSeries:
    terms: dict = {}
    for (e, j), x in zip(stalk_coordinates(ring, nvars, degree), vec):
        if x:
            k = sum(e) - degree
            c = terms.setdefault(e, [0] * ring.ranks[k])
            c[j] = x
    return GradedSeries.make(ring, nvars, degree, {e: tuple(c) for e, c in terms.items()})


# ---------------------------------------------------------------------------
# domains and sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """A fan, or the star of ``anchor`` in it."""

    fan: Fan
    anchor: ConeKey | None = None

    @cached_property
    def maximal(self) -> tuple[ConeKey, ...]:
        if self.anchor is None:
            return self.fan.maximal
        if tuple(self.anchor) not in self.fan.cone_set:
            raise FanError(f"{list(self.anchor)} is not a cone of the fan")
        return tuple(star_maximal(self.fan, self.anchor))

    @cached_property
    def cones(self) -> tuple[ConeKey, ...]:
        if self.anchor is None:
            return self.fan.cones
        a = set(self.anchor)
        return tuple(k for k in self.fan.cones if a <= set(k))

    def cone(self, key: ConeKey) -> Cone:
        return self.fan.cone(key)

    def pairs(self) -> list[tuple[ConeKey, ConeKey, ConeKey]]:
        """``(sigma, sigma', sigma ∩ sigma')`` over pairs of maximal cones."""
        out = []
        ms = self.maximal
        for i in range(len(ms)):
            for j in range(i + 1, len(ms)):
                out.append((ms[i], ms[j], tuple(sorted(set(ms[i]) & set(ms[j])))))
        return out

    def face_constraints(self) -> list[tuple[ConeKey, ConeKey, ConeKey]]:
        """``(sigma, first, tau)``: every face ``tau`` of every maximal ``sigma``, matched
        against the first maximal cone containing it (exhaustive mode)."""
        out = []
        for tau in self.cones:
            owners = [m for m in self.maximal if set(tau) <= set(m)]
            for m in owners[1:]:
                out.append((owners[0], m, tau))
        return out

    def owner(self, key: ConeKey) -> ConeKey:
        """First maximal cone of the domain containing ``key``."""
        s = set(key)
        for m in self.maximal:
            if s <= set(m):
                return m
        raise FanError(f"{list(key)} is not in the domain")

    def describe(self) -> str:
        return "fan" if self.anchor is None else f"star of {list(self.anchor)}"


def as_domain(obj) -> Domain:
    return obj if isinstance(obj, Domain) else Domain(obj)


@dataclass(eq=False)
class PiecewiseSeries:
    """Assignment of a degree-``degree`` stalk series to each maximal cone."""

    domain: Domain
    ring: GradedRing
    degree: int
    values: dict

    def __post_init__(self):
        for key in self.domain.maximal:
            if key not in self.values:
                raise SheafError(f"no value on maximal cone {list(key)}")
            f = self.values[key]
            if f.ring is not self.ring or f.degree != self.degree or f.nvars != self.domain.cone(key).dim:
                raise SheafError(f"value on {list(key)} is not in the stalk (degree {self.degree})")

    def __eq__(self, other):
        if not isinstance(other, PiecewiseSeries):
            return NotImplemented
        return (self.domain == other.domain and self.ring is other.ring and self.degree == other.degree
                and all(self.values[k] == other.values[k] for k in self.domain.maximal))

    __hash__ = None

    def at(self, key: ConeKey) -> GradedSeries:
        """Value on any cone of the domain (restricted from a maximal cone)."""
        key = tuple(key)
        if key in self.values:
            return self.values[key]
        m = self.domain.owner(key)
        return lattice_restriction(self.domain.cone(m), self.domain.cone(key), self.ring)(self.values[m])

    def to_vector(self) -> list[int]:
        out = []
        for key in self.domain.maximal:
            out.extend(series_to_vector(self.values[key], self.degree))
        return out

    def to_json(self) -> dict:
        return {"degree": self.degree, "ring": self.ring.name,
                "values": {",".join(map(str, k)): self.values[k].to_json() for k in self.domain.maximal}}

    def __str__(self):
        parts = [f"  {list(k)}: {self.values[k]}" for k in self.domain.maximal]
        return f"section of degree {self.degree} on {self.domain.describe()}:\n" + "\n".join(parts)

    def __add__(self, other):
        _same_domain(self, other)
        return PiecewiseSeries(self.domain, self.ring, self.degree,
                               {k: self.values[k] + other.values[k] for k in self.domain.maximal})

    def __mul__(self, other):
        return pps_multiply(self, other)


def _same_domain(p, q):
    if p.domain != q.domain or p.ring is not q.ring:
        raise SheafError("sections live on different domains or rings")


def constant_section(domain, ring: GradedRing, piece: int = 0, value: Sequence[int] = (1,)) -> PiecewiseSeries:
    domain = as_domain(domain)
    return PiecewiseSeries(domain, ring, -piece,
                           {k: _const(ring, domain.cone(k).dim, piece, tuple(value)) for k in domain.maximal})


def is_global_section(p: PiecewiseSeries, all_faces: bool = False) -> bool:
    """Pairwise compatibility on intersections of maximal cones (or on every face)."""
    checks = p.domain.face_constraints() if all_faces else p.domain.pairs()
    for s1, s2, tau in checks:
        t = p.domain.cone(tau)
        r1 = lattice_restriction(p.domain.cone(s1), t, p.ring)
        r2 = lattice_restriction(p.domain.cone(s2), t, p.ring)
        if r1(p.values[s1]) != r2(p.values[s2]):
            return False
    return True


def pps_multiply(p: PiecewiseSeries, q: PiecewiseSeries) -> PiecewiseSeries:
    _same_domain(p, q)
    return PiecewiseSeries(p.domain, p.ring, p.degree + q.degree,
                           {k: series_mul(p.values[k], q.values[k]) for k in p.domain.maximal})


def restrict_to_star(p: PiecewiseSeries, pi: ConeKey) -> PiecewiseSeries:
    pi = tuple(pi)
    if pi not in p.domain.fan.cone_set:
        raise FanError(f"{list(pi)} is not a cone of the fan")
    dom = Domain(p.domain.fan, pi if pi else None)
    return PiecewiseSeries(dom, p.ring, p.degree, {k: p.values[k] for k in dom.maximal})


def pullback_subdivision(m: SubdivisionMap, p: PiecewiseSeries, anchor: ConeKey | None = None) -> PiecewiseSeries:
    """Pull a section on (a star in) the target fan back to the subdivision.

    With ``anchor`` (a cone of ``m.source``) the result lives on the star of
    ``anchor``; ``p`` must then live on a star containing every ``phi(sigma)``.
    """
    if p.domain.fan != m.target:
        raise SheafError("section does not live on the subdivided fan")
    dom = Domain(m.source, anchor)
    values = {}
    for key in dom.maximal:
        down = m.phi[key]
        value = p.at(down)
        values[key] = lattice_restriction(m.target.cone(down), m.source.cone(key), p.ring)(value)
    return PiecewiseSeries(dom, p.ring, p.degree, values)


def specialize_section(s, p: PiecewiseSeries) -> PiecewiseSeries:
    """Apply a :class:`~fglfans.lazard.Specialization` stalk-wise."""
    from .lazard import apply_specialization
    return PiecewiseSeries(p.domain, s.target, p.degree,
                           {k: apply_specialization(s, v) for k, v in p.values.items()})


# ---------------------------------------------------------------------------
# the global-sections solver
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SectionModule:
    """Free module of global sections in one degree, with its coordinate layout."""

    domain: Domain
    ring: GradedRing
    degree: int
    layout: list[tuple[ConeKey, int, int]]  # (maximal cone, offset, size)
    basis: list[tuple[int, ...]]

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return sum(n for _, _, n in self.layout)

    def section_from_vector(self, vec: Sequence[int]) -> PiecewiseSeries:
        values = {}
        for key, off, n in self.layout:
            values[key] = vector_to_series(self.ring, self.domain.cone(key).dim, self.degree, vec[off:off + n])
        return PiecewiseSeries(self.domain, self.ring, self.degree, values)

    def sections(self) -> list[PiecewiseSeries]:
        return [self.section_from_vector(v) for v in self.basis]

    def hermite(self) -> list[tuple[int, ...]]:
        return intlin.hermite_rows(self.basis, self.size)


def layout_for(domain: Domain, ring: GradedRing, degree: int) -> list[tuple[ConeKey, int, int]]:
    out, off = [], 0
    for key in domain.maximal:
        n = len(stalk_coordinates(ring, domain.cone(key).dim, degree))
        out.append((key, off, n))
        off += n
    return out


def compatibility_equations(domain: Domain, ring: GradedRing, degree: int,
                            all_faces: bool = False) -> tuple[list[dict[int, int]], list]:
    layout = layout_for(domain, ring, degree)
    offsets = {k: off for k, off, _ in layout}
    eqs: list[dict[int, int]] = []
    checks = domain.face_constraints() if all_faces else domain.pairs()
    for s1, s2, tau in checks:
        t = domain.cone(tau)
        ntgt = len(stalk_coordinates(ring, t.dim, degree))
        if ntgt == 0:
            continue
        rows = [dict() for _ in range(ntgt)]
        for sign, sk in ((1, s1), (-1, s2)):
            cols = lattice_restriction(domain.cone(sk), t, ring).linear_map(degree)
            off = offsets[sk]
            for c, col in enumerate(cols):
                for r, x in col.items():
                    rows[r][off + c] = rows[r].get(off + c, 0) + sign * x
        eqs.extend({k: x for k, x in r.items() if x} for r in rows)
    return [e for e in eqs if e], layout


def global_sections(domain, degree: int, ring: GradedRing, all_faces: bool = False) -> SectionModule:
    """Basis of the degree-``degree`` global sections over ``domain`` (fan or star)."""
    domain = as_domain(domain)
    if degree > ring.bound:
        return SectionModule(domain, ring, degree, layout_for(domain, ring, degree), [])
    eqs, layout = compatibility_equations(domain, ring, degree, all_faces)
    size = sum(n for _, _, n in layout)
    basis = intlin.kernel_basis(eqs, size)
    return SectionModule(domain, ring, degree, layout, basis)


def restriction_chain_defect(chain: Sequence[Cone], ring: GradedRing, degree: int | None = None) -> list:
    """Compare ``res(tau->rho) ∘ res(sigma->tau)`` with ``res(sigma->rho)`` on variables.

    ``chain = (sigma, tau, rho)``; returns the list of variables where the two
    images differ (empty when functoriality holds).  Both are ring maps, so
    agreement on variables is agreement everywhere.
    """
    sigma, tau, rho = chain
    r1 = lattice_restriction(sigma, tau, ring)
    r2 = lattice_restriction(tau, rho, ring)
    r3 = lattice_restriction(sigma, rho, ring)
    bad = []
    for i, t in enumerate(variables(ring, sigma.dim)):
        if r2(r1(t)) != r3(t):
            bad.append(i)
    return bad
