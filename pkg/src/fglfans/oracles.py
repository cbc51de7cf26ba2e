"""Independent cross-checks for the piecewise power series solver.

``pp_global_sections`` solves for piecewise polynomials written in ambient
dual coordinates with exact rational elimination.  It shares no code with the
stalk/FGL machinery, so agreement with the additive-specialized solver is a
real test of basis handling and constraint assembly.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial, lcm
from typing import Sequence

from .fan import Fan

Poly = dict  # exponent tuple -> int/Fraction


# -- dense polynomials in ambient coordinates ---------------------------------

def monomials(n: int, d: int) -> list[tuple[int, ...]]:
    out = []
    for combo in combinations_with_replacement(range(n), d):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def _pmul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for a, x in p.items():
        for b, y in q.items():
            e = tuple(i + j for i, j in zip(a, b))
            out[e] = out.get(e, 0) + x * y
    return {e: c for e, c in out.items() if c}


def _ppow(p: Poly, k: int, nv: int) -> Poly:
    out: Poly = {(0,) * nv: 1}
    for _ in range(k):
        out = _pmul(out, p)
    return out


def substitute_rays(mono: tuple[int, ...], rays: Sequence[Sequence[int]]) -> Poly:
    """Expand ``x^mono`` with ``x = sum_k c_k r_k`` as a polynomial in the ``c_k``."""
    nv = len(rays)
    out: Poly = {(0,) * nv: 1}
    for i, k in enumerate(mono):
        if k:
            lin = {tuple(int(j == r) for j in range(nv)): ray[i] for r, ray in enumerate(rays) if ray[i]}
            out = _pmul(out, _ppow(lin, k, nv))
    return out


def _restriction_rows(rays, monos) -> list[list[int]]:
    """Matrix of ``P -> P(sum c_k r_k)``: one row per ``c``-monomial, one column per ``x``-monomial."""
    images = [substitute_rays(m, rays) for m in monos]
    keys = sorted({e for im in images for e in im})
    return [[im.get(e, 0) for im in images] for e in keys]


def rank_rational(rows: Sequence[Sequence]) -> int:
    return len(_echelon(rows)[1])


def _echelon(rows):
    m = [[Fraction(x) for x in r] for r in rows if any(r)]
    pivots = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def nullspace_rational(rows, ncols: int) -> list[list[int]]:
    """Integer-scaled rational basis of the right null space."""
    red, pivots = _echelon(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        den = lcm(*(x.denominator for x in v))
        out.append([int(x * den) for x in v])
    return out


# -- piecewise polynomials ----------------------------------------------------

@dataclass
class PiecewisePolynomialSection:
    fan: Fan
    degree: int
    polys: dict  # maximal cone key -> {exponent: int}

    def agrees_on_faces(self) -> bool:
        """Evaluate the differences on the rays spanning every shared face."""
        ms = self.fan.maximal
        for i in range(len(ms)):
            for j in range(i + 1, len(ms)):
                common = sorted(set(ms[i]) & set(ms[j]))
                rays = [self.fan.rays[k] for k in common]
                diff = dict(self.polys[ms[i]])
                for e, c in self.polys[ms[j]].items():
                    diff[e] = diff.get(e, 0) - c
                total: Poly = {}
                for e, c in diff.items():
                    if c:
                        for ce, v in substitute_rays(e, rays).items():
                            total[ce] = total.get(ce, 0) + c * v
                if any(total.values()):
                    return False
        return True


@dataclass
class PPResult:
    degree: int
    rank: int
    basis: list[PiecewisePolynomialSection]


def pp_global_sections(f: Fan, d: int) -> PPResult:
    """Piecewise polynomials of degree ``d`` on ``f`` (modulo those vanishing on each cone)."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    n = f.rank
    monos = monomials(n, d)
    N = len(monos)
    ms = f.maximal
    blocks = {key: i * N for i, key in enumerate(ms)}
    rows = []
    for i in range(len(ms)):
        for j in range(i + 1, len(ms)):
            rays = [f.rays[k] for k in sorted(set(ms[i]) & set(ms[j]))]
            for r in _restriction_rows(rays, monos):
                row = [0] * (N * len(ms))
                for c, x in enumerate(r):
                    row[blocks[ms[i]] + c] = x
                    row[blocks[ms[j]] + c] = -x
                rows.append(row)
    total = N * len(ms)
    solutions = nullspace_rational(rows, total) if rows else [
        [int(i == k) for i in range(total)] for k in range(total)]

    # quotient by polynomials vanishing on each maximal cone
    restrict = {key: _restriction_rows([f.rays[k] for k in key], monos) for key in ms}
    vanishing = sum(N - rank_rational(restrict[key]) for key in ms)
    rank = len(solutions) - vanishing

    def image(v):
        out = []
        for key in ms:
            block = v[blocks[key]:blocks[key] + N]
            out.extend(sum(r[c] * block[c] for c in range(N)) for r in restrict[key])
        return out

    basis, acc = [], []
    for v in solutions:
        trial = acc + [image(v)]
        if rank_rational(trial) > len(acc):
            acc = trial
            polys = {key: {monos[c]: v[blocks[key] + c] for c in range(N) if v[blocks[key] + c]}
                     for key in ms}
            basis.append(PiecewisePolynomialSection(f, d, polys))
    if len(basis) != rank:
        raise AssertionError("rank bookkeeping of the polynomial solver is inconsistent")
    return PPResult(d, rank, basis)


@dataclass
class ComparisonReport:
    degrees: list[int]
    pp_ranks: list[int]
    pps_ranks: list[int]

    @property
    def ok(self) -> bool:
        return self.pp_ranks == self.pps_ranks

    @property
    def witness(self) -> int | None:
        for d, a, b in zip(self.degrees, self.pp_ranks, self.pps_ranks):
            if a != b:
                return d
        return None

    def to_json(self) -> dict:
        return {"degrees": self.degrees, "pp_ranks": self.pp_ranks, "pps_ranks": self.pps_ranks,
                "ok": self.ok, "witness_degree": self.witness}


def compare_with_additive_specialization(f: Fan, degrees, bound: int = 3) -> ComparisonReport:
    from .fgl import GradedRing
    from .pps import Domain, global_sections

    if isinstance(degrees, int):
        degrees = [degrees]
    degrees = list(degrees)
    if any(d < 0 or d > bound for d in degrees):
        raise ValueError(f"degrees must lie in 0..{bound}")
    ring = GradedRing.additive(bound)
    pp = [pp_global_sections(f, d).rank for d in degrees]
    pps = [global_sections(Domain(f), d, ring).rank for d in degrees]
    return ComparisonReport(degrees, pp, pps)


# -- multiplicative law ------------------------------------------------------

def _binom(a: int, i: int) -> int:
    num = 1
    for k in range(i):
        num *= a - k
    return num // factorial(i)


def multiplicative_image(coeffs: Sequence[int], bound: int) -> dict:
    """Closed form of ``[a_1]u_1 + ... + [a_l]u_l`` for ``F = u + v - b uv``.

    From ``1 - b F = prod (1 - b u_k)^{a_k}``: the coefficient of ``u^I`` is
    ``(-1)^(|I|+1) prod C(a_k, i_k) b^(|I|-1)``.  Returns ``{I: value}``,
    truncated at total degree ``bound``.
    """
    l = len(coeffs)
    out = {}
    for tot in range(1, bound + 1):
        for e in monomials(l, tot):
            c = (-1) ** (tot + 1)
            for a, i in zip(coeffs, e):
                c *= _binom(a, i)
            if c:
                out[e] = c
    return out


def multiplicative_restriction_defects(f: Fan, bound: int = 3) -> list[str]:
    """Compare every face restriction over the multiplicative ring with the closed form."""
    from .fgl import GradedRing
    from .pps import lattice_restriction

    ring = GradedRing.multiplicative(bound)
    bad = []
    for key in f.cones:
        sigma = f.cone(key)
        for tkey in f.faces_of(key):
            tau = f.cone(tkey)
            rm = lattice_restriction(sigma, tau, ring)
            for i, img in enumerate(rm.images):
                want = multiplicative_image(rm.matrix[i], bound)
                got = {e: c[0] for e, c in img.terms.items()}
                if got != want:
                    bad.append(f"{list(key)} -> {list(tkey)}, variable {i}: {got} != {want}")
    return bad
