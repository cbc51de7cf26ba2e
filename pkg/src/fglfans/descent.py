"""Descent along star subdivisions, checked with exact integer linear algebra.

For a star subdivision ``Delta' -> Delta`` with new ray ``rho`` whose center
lies in the relative interior of ``pi``, the square

    PPS(Delta)   ->  PPS(St pi)
        |                |
    PPS(Delta')  ->  PPS(St rho)

should be Cartesian: a section upstairs comes from ``Delta`` exactly when
its restriction to ``St rho`` comes from ``St pi``.  Orbit closures are never
built; ``V_pi`` and ``V_rho`` are represented by the stars.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import intlin
from ._kernels import lincomb
from .fan import Fan, SubdivisionMap, resolve
from .fgl import GradedRing
from .pps import (Domain, PiecewiseSeries, SectionModule, global_sections, is_global_section,
                  layout_for, pullback_subdivision, restrict_to_star)


class RouteMismatchError(RuntimeError):
    """The resolve-and-glue route disagrees with the direct solver."""


def identity_subdivision(f: Fan) -> SubdivisionMap:
    """The trivial subdivision ``f -> f`` (``pi = rho = 0``)."""
    return SubdivisionMap(f, f, None, {k: k for k in f.cones}, (), ())


def star_pullback(m: SubdivisionMap, s: PiecewiseSeries) -> PiecewiseSeries:
    """Pull a section on ``St pi`` back to ``St rho``: ``t_sigma = res(s_phi(sigma))``."""
    if s.domain.fan != m.target or s.domain.anchor != (m.pi or None):
        raise ValueError("section must live on the star of pi")
    for key in Domain(m.source, m.rho or None).maximal:
        if not set(m.pi) <= set(m.phi[key]):
            raise ValueError(f"cone {list(key)} of St rho does not map into St pi")
    return pullback_subdivision(m, s, anchor=m.rho or None)


@dataclass
class GluingReport:
    degree: int
    ranks: dict
    commutes: bool
    injective: bool
    exact: bool
    witness: str | None = None

    @property
    def cartesian(self) -> bool:
        return self.commutes and self.injective and self.exact

    def to_json(self) -> dict:
        return {"degree": self.degree, "ranks": self.ranks, "commutes": self.commutes,
                "injective": self.injective, "exact": self.exact, "cartesian": self.cartesian,
                "witness": self.witness}

    def __str__(self):
        r = self.ranks
        return (f"d={self.degree}: rank PPS(D)={r['delta']} PPS(D')={r['delta_prime']} "
                f"PPS(St pi)={r['star_pi']} PPS(St rho)={r['star_rho']} fiber={r['fiber_product']} "
                f"commutes={self.commutes} injective={self.injective} exact={self.exact} "
                f"-> {'Cartesian' if self.cartesian else 'NOT Cartesian'}")


@dataclass
class DescentSquare:
    """The four section modules of one subdivision in one degree, and the maps between them."""

    sub: SubdivisionMap
    ring: GradedRing
    degree: int
    delta: SectionModule = field(init=False)
    delta_prime: SectionModule = field(init=False)
    star_pi: SectionModule = field(init=False)
    star_rho: SectionModule = field(init=False)

    def __post_init__(self):
        m, d, R = self.sub, self.degree, self.ring
        self.delta = global_sections(Domain(m.target), d, R)
        self.delta_prime = global_sections(Domain(m.source), d, R)
        self.star_pi = global_sections(self.pi_domain, d, R)
        self.star_rho = global_sections(self.rho_domain, d, R)

    @property
    def pi_domain(self) -> Domain:
        return Domain(self.sub.target, self.sub.pi or None)

    @property
    def rho_domain(self) -> Domain:
        return Domain(self.sub.source, self.sub.rho or None)

    # the four maps, on sections
    def down_right(self, p):  # PPS(Delta) -> PPS(Delta') -> PPS(St rho)
        return restrict_to_star(pullback_subdivision(self.sub, p), self.sub.rho)

    def right_down(self, p):  # PPS(Delta) -> PPS(St pi) -> PPS(St rho)
        return star_pullback(self.sub, restrict_to_star(p, self.sub.pi))


def _rank(vectors) -> int:
    return intlin.rank_q(vectors) if vectors else 0


def fiber_product(sub: SubdivisionMap, upstairs: SectionModule, star_pi: SectionModule,
                  ring: GradedRing, degree: int) -> list[tuple[int, ...]]:
    """Sections on ``sub.target`` glued from ``upstairs`` and ``star_pi`` (as vectors).

    Solves ``x'|St rho = star_pullback(s)`` for integer combinations of the
    two bases and maps each solution to the target fan's coordinates.
    """
    target_dom = Domain(sub.target)
    rho_dom = Domain(sub.source, sub.rho or None)
    up_layout = {k: (off, n) for k, off, n in upstairs.layout}
    rho_layout = layout_for(rho_dom, ring, degree)

    def restrict_vec(vec):
        out = []
        for key, _, _ in rho_layout:
            off, n = up_layout[key]
            out.extend(vec[off:off + n])
        return out

    cols = [restrict_vec(v) for v in upstairs.basis]
    pulled = [star_pullback(sub, s).to_vector() for s in star_pi.sections()]
    cols += [[-x for x in v] for v in pulled]
    nrows = sum(n for _, _, n in rho_layout)
    a, b = len(upstairs.basis), len(star_pi.basis)
    eqs = [{c: cols[c][r] for c in range(a + b) if cols[c][r]} for r in range(nrows)]
    kernel = intlin.kernel_basis(eqs, a + b)

    pi_layout = {k: (off, n) for k, off, n in star_pi.layout}
    out = []
    for sol in kernel:
        alpha, beta = sol[:a], sol[a:]
        up = lincomb(alpha, upstairs.basis, upstairs.size)
        st = lincomb(beta, star_pi.basis, star_pi.size)
        vec = []
        for key in target_dom.maximal:
            if key in pi_layout:
                off, n = pi_layout[key]
                vec.extend(st[off:off + n])
            else:
                up_key = sub.source.key_of(sub.target.cone(key).rays)
                off, n = up_layout[up_key]
                vec.extend(up[off:off + n])
        out.append(tuple(vec))
    return out


def check_cartesian(sq: DescentSquare, degree: int | None = None) -> GluingReport:
    """Commutativity, injectivity of the pullback and exactness of the gluing."""
    if degree is not None and degree != sq.degree:
        sq = DescentSquare(sq.sub, sq.ring, degree)
    d, ring, sub = sq.degree, sq.ring, sq.sub
    witness = None
    sections = sq.delta.sections()

    commutes = True
    for i, p in enumerate(sections):
        if sq.down_right(p) != sq.right_down(p):
            commutes = False
            witness = witness or f"square does not commute on basis section {i}"

    images = [pullback_subdivision(sub, p).to_vector() for p in sections]
    injective = _rank(images) == sq.delta.rank
    if not injective:
        witness = witness or "pullback has a kernel on global sections"

    glued = fiber_product(sub, sq.delta_prime, sq.star_pi, ring, d)
    exact = len(glued) == sq.delta.rank
    if not exact:
        witness = witness or f"fiber product has rank {len(glued)}, PPS(Delta) has rank {sq.delta.rank}"
    else:
        for i, vec in enumerate(glued):
            p = sq.delta.section_from_vector(vec)
            if not is_global_section(p):
                exact = False
                witness = witness or f"glued element {i} is not a global section on Delta"
                break
        if exact and intlin.hermite_rows(glued, sq.delta.size) != sq.delta.hermite():
            exact = False
            witness = witness or "glued module differs from PPS(Delta)"

    ranks = {"delta": sq.delta.rank, "delta_prime": sq.delta_prime.rank, "star_pi": sq.star_pi.rank,
             "star_rho": sq.star_rho.rank, "fiber_product": len(glued)}
    return GluingReport(d, ranks, commutes, injective, exact, witness)


def pullback_kernel_rank(sub: SubdivisionMap, degree: int, ring: GradedRing) -> int:
    """Rank of the kernel of ``PPS(Delta) -> PPS(Delta')`` in one degree."""
    mod = global_sections(Domain(sub.target), degree, ring)
    images = [pullback_subdivision(sub, p).to_vector() for p in mod.sections()]
    return mod.rank - _rank(images)


@dataclass
class RouteReport:
    fan: str
    degree: int
    strategy: str
    steps: int
    step_ranks: list[int]
    direct_rank: int
    glued_rank: int
    agree: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def descend_chain(chain, degree: int, ring: GradedRing) -> tuple[SectionModule, list[int]]:
    """Solve on the last fan of a subdivision chain and glue back to the first.

    ``chain[i]`` subdivides ``chain[i].target`` into ``chain[i].source`` and
    ``chain[i + 1].target`` must be ``chain[i].source``.  Returns the module
    on ``chain[0].target`` and the ranks met on the way (finest fan first).
    """
    for a, b in zip(chain, chain[1:]):
        if b.target != a.source:
            raise ValueError("subdivisions do not compose")
    module = global_sections(Domain(chain[-1].source), degree, ring)
    ranks = [module.rank]
    for step in reversed(chain):
        star_pi = global_sections(Domain(step.target, step.pi or None), degree, ring)
        glued = fiber_product(step, module, star_pi, ring, degree)
        dom = Domain(step.target)
        module = SectionModule(dom, ring, degree, layout_for(dom, ring, degree), glued)
        ranks.append(module.rank)
    return module, ranks


def compute_via_resolution(f: Fan, degree: int, ring: GradedRing, strategy="min",
                           strict: bool = True) -> tuple[SectionModule, RouteReport]:
    """Global sections of ``f`` by resolving, solving on the smooth fan and gluing back.

    ``strategy`` is a center-choice name for :func:`resolve` or an explicit
    chain of subdivisions starting at ``f``.  Raises
    :class:`RouteMismatchError` (when ``strict``) if the glued module is not
    exactly the one the direct solver returns.
    """
    if isinstance(strategy, str):
        chain, label = resolve(f, strategy), strategy
    else:
        chain, label = list(strategy), "explicit"
        if chain and chain[0].target != f:
            raise ValueError("chain does not start at the given fan")
    direct = global_sections(Domain(f), degree, ring)
    if chain:
        module, step_ranks = descend_chain(chain, degree, ring)
    else:
        module, step_ranks = direct, [direct.rank]
    agree = module.rank == direct.rank and module.hermite() == direct.hermite()
    report = RouteReport(f.dumps(), degree, label, len(chain), step_ranks, direct.rank, module.rank, agree)
    if strict and not agree:
        raise RouteMismatchError(f"resolution route disagrees with the direct solver: {report.to_json()}")
    return module, report


def report_json(reports) -> str:
    return json.dumps([r.to_json() for r in reports], sort_keys=True, indent=2)
