"""Truncated graded power series and formal group law calculus.

A :class:`GradedRing` is a commutative ring ``A = ⊕ A_{-k}`` (``0 <= k <= D``)
whose pieces are free abelian groups of finite rank, described by structure
constants.  It carries the coefficients ``a_{i,j}`` of a formal group law

    F(u, v) = u + v + sum_{i,j>0} a_{i,j} u^i v^j.

A :class:`GradedSeries` of degree ``d`` in ``n`` variables (each of degree 1)
is ``sum_I c_I t^I`` with ``c_I`` in ``A_{d-|I|}``, i.e. in piece index
``|I| - d``.  All arithmetic is exact modulo monomials of total degree above
``D`` and ring elements of degree below ``-D``; both are ideals, so every ring
identity survives truncation.

Coefficients are coordinate tuples in the fixed basis of their piece.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from ._kernels import mul_terms

Exponent = tuple[int, ...]
Coeff = tuple[int, ...]


class SeriesError(ValueError):
    """Incompatible operands (ring, variable count or degree mismatch)."""


@dataclass(eq=False)
class GradedRing:
    """Graded coefficient ring given by ranks and structure constants.

    ``ranks[k]`` is the rank of the piece of cohomological degree ``-k``;
    ``products[(k, l)][i][j]`` is the coordinate tuple (in piece ``k + l``)
    of the product of basis elements ``e_i`` of piece ``k`` and ``e_j`` of
    piece ``l``.  ``fgl_coefficients[(i, j)]`` lies in piece ``i + j - 1``.
    Instances are treated as immutable after construction.
    """

    name: str
    bound: int
    ranks: tuple[int, ...]
    products: Mapping[tuple[int, int], Sequence[Sequence[Coeff]]]
    fgl_coefficients: Mapping[tuple[int, int], Coeff]
    labels: tuple[tuple[str, ...], ...] = ()
    table: list = field(init=False, repr=False)

    def __post_init__(self):
        D = self.bound
        if D < 0 or len(self.ranks) != D + 1:
            raise SeriesError("ranks must list pieces 0..D")
        if self.ranks[0] != 1:
            raise SeriesError("degree-0 piece must be Z")
        if not self.labels:
            self.labels = tuple(tuple(f"e{k}_{i}" for i in range(r)) for k, r in enumerate(self.ranks))
        for (i, j), a in self.fgl_coefficients.items():
            if self.fgl_coefficients.get((j, i), a) != a:
                raise SeriesError(f"FGL coefficients not symmetric at {(i, j)}")
        # Dense table for the kernel; None marks products that vanish by degree.
        self.table = [[None] * (D + 1) for _ in range(D + 1)]
        for k in range(D + 1):
            for l in range(D + 1):
                if k + l <= D and self.ranks[k] and self.ranks[l] and self.ranks[k + l]:
                    if k == 0:
                        tab = [[tuple(int(a == b) for b in range(self.ranks[l])) for a in range(self.ranks[l])]]
                    elif l == 0:
                        tab = [[tuple(int(a == b) for b in range(self.ranks[k]))] for a in range(self.ranks[k])]
                    else:
                        tab = [[tuple(c) for c in row] for row in self.products[(k, l)]]
                    self.table[k][l] = tab

    def __repr__(self):
        return f"GradedRing({self.name!r}, D={self.bound}, ranks={self.ranks})"

    # -- elements ---------------------------------------------------------
    def rank(self, k: int) -> int:
        return self.ranks[k] if 0 <= k <= self.bound else 0

    def one(self) -> Coeff:
        return (1,)

    def fgl_coefficient(self, i: int, j: int) -> Coeff:
        k = i + j - 1
        return self.fgl_coefficients.get((i, j), (0,) * self.rank(k))

    def multiply(self, k: int, a: Coeff, l: int, b: Coeff) -> Coeff:
        """Product of ``a`` in piece ``k`` and ``b`` in piece ``l``."""
        tab = self.table[k][l] if k + l <= self.bound else None
        if tab is None:
            return (0,) * self.rank(k + l)
        out = [0] * self.ranks[k + l]
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        for m, z in enumerate(tab[i][j]):
                            out[m] += x * y * z
        return tuple(out)

    def format_element(self, k: int, a: Coeff) -> str:
        parts = []
        for x, lab in zip(a, self.labels[k]):
            if not x:
                continue
            if lab == "1":
                parts.append(str(x))
            elif x == 1:
                parts.append(lab)
            elif x == -1:
                parts.append("-" + lab)
            else:
                parts.append(f"{x}*{lab}")
        return " + ".join(parts) if parts else "0"

    # -- standard rings ---------------------------------------------------
    @classmethod
    def additive(cls, bound: int) -> "GradedRing":
        """Z in degree 0 with the additive law ``F = u + v`` (one shared instance per bound)."""
        key = ("additive", bound)
        if key not in _STANDARD_RINGS:
            ranks = (1,) + (0,) * bound
            _STANDARD_RINGS[key] = cls("additive", bound, ranks, {}, {}, labels=(("1",),) + ((),) * bound)
        return _STANDARD_RINGS[key]

    @classmethod
    def multiplicative(cls, bound: int) -> "GradedRing":
        """``Z[beta]/(beta^(D+1))`` with ``deg beta = -1`` and ``F = u + v - beta u v``."""
        key = ("multiplicative", bound)
        if key not in _STANDARD_RINGS:
            ranks = (1,) * (bound + 1)
            products = {(k, l): [[(1,)]] for k in range(1, bound + 1)
                        for l in range(1, bound + 1) if k + l <= bound}
            fgl = {(1, 1): (-1,)} if bound >= 1 else {}
            labels = (("1",),) + tuple((f"b^{k}" if k > 1 else "b",) for k in range(1, bound + 1))
            _STANDARD_RINGS[key] = cls("multiplicative", bound, ranks, products, fgl, labels=labels)
        return _STANDARD_RINGS[key]


_STANDARD_RINGS: dict = {}


@dataclass(frozen=True, eq=False)
class GradedSeries:
    """Homogeneous degree-``degree`` series in ``nvars`` variables."""

    ring: GradedRing
    nvars: int
    degree: int
    terms: Mapping[Exponent, Coeff]

    def __post_init__(self):
        for e, c in self.terms.items():
            k = sum(e) - self.degree
            if len(e) != self.nvars:
                raise SeriesError("exponent length does not match nvars")
            if sum(e) > self.ring.bound or not 0 <= k <= self.ring.bound or len(c) != self.ring.ranks[k]:
                raise SeriesError(f"coefficient at {e} not in the right graded piece")

    @classmethod
    def make(cls, ring, nvars, degree, terms) -> "GradedSeries":
        """Build a series, silently truncating and dropping zeros."""
        clean = {}
        for e, c in terms.items():
            e = tuple(e)
            k = sum(e) - degree
            if sum(e) > ring.bound or not 0 <= k <= ring.bound or not ring.ranks[k]:
                continue
            c = tuple(c)
            if any(c):
                clean[e] = c
        return cls(ring, nvars, degree, clean)

    # -- comparison and display -------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return (self.ring is other.ring and self.nvars == other.nvars
                and self.degree == other.degree and dict(self.terms) == dict(other.terms))

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exponent: Sequence[int]) -> Coeff:
        e = tuple(exponent)
        k = sum(e) - self.degree
        return self.terms.get(e, (0,) * self.ring.rank(k))

    def sorted_terms(self) -> list[tuple[Exponent, Coeff]]:
        """Terms in graded-lexicographic order (t1 before t2 at equal degree)."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), tuple(-x for x in t[0])))

    def linear_part(self) -> dict[int, int]:
        """Integer coefficients of ``t_i`` (degree-1 series only)."""
        out = {}
        for i in range(self.nvars):
            e = tuple(int(j == i) for j in range(self.nvars))
            c = self.terms.get(e)
            if c is not None and sum(e) - self.degree == 0:
                out[i] = c[0]
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            coef = self.ring.format_element(sum(e) - self.degree, c)
            mono = "*".join(f"t{i + 1}" + (f"^{x}" if x > 1 else "") for i, x in enumerate(e) if x)
            if not mono:
                parts.append(coef)
            elif coef == "1":
                parts.append(mono)
            elif coef == "-1":
                parts.append("-" + mono)
            elif " + " in coef:
                parts.append(f"({coef})*{mono}")
            else:
                parts.append(f"{coef}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {"degree": self.degree, "nvars": self.nvars,
                "terms": [[list(e), list(c)] for e, c in self.sorted_terms()]}

    @classmethod
    def from_json(cls, ring: GradedRing, data: dict) -> "GradedSeries":
        return cls.make(ring, data["nvars"], data["degree"],
                        {tuple(e): tuple(c) for e, c in data["terms"]})

    # -- operators ----------------------------------------------------------
    def __add__(self, other):
        return series_add(self, other)

    def __neg__(self):
        return series_neg(self)

    def __sub__(self, other):
        return series_add(self, series_neg(other))

    def __mul__(self, other):
        return series_mul(self, other)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def zero(ring: GradedRing, nvars: int, degree: int = 1) -> GradedSeries:
    return GradedSeries(ring, nvars, degree, {})


def one(ring: GradedRing, nvars: int) -> GradedSeries:
    return GradedSeries(ring, nvars, 0, {(0,) * nvars: (1,)})


def constant(ring: GradedRing, nvars: int, piece: int, value: Sequence[int]) -> GradedSeries:
    """The ring element ``value`` of piece ``piece`` as a series of degree ``-piece``."""
    return GradedSeries.make(ring, nvars, -piece, {(0,) * nvars: tuple(value)})


def variable(ring: GradedRing, nvars: int, i: int) -> GradedSeries:
    e = tuple(int(j == i) for j in range(nvars))
    return GradedSeries.make(ring, nvars, 1, {e: (1,)})


def variables(ring: GradedRing, nvars: int) -> list[GradedSeries]:
    return [variable(ring, nvars, i) for i in range(nvars)]


def is_chern_element(f: GradedSeries) -> bool:
    """Degree 1 and no constant term (the shape of a first Chern class)."""
    return f.degree == 1 and (0,) * f.nvars not in f.terms


# ---------------------------------------------------------------------------
# ring operations
# ---------------------------------------------------------------------------

def _check_compatible(f: GradedSeries, g: GradedSeries):
    if f.ring is not g.ring:
        raise SeriesError(f"ring mismatch: {f.ring!r} vs {g.ring!r}")
    if f.nvars != g.nvars:
        raise SeriesError(f"variable count mismatch: {f.nvars} vs {g.nvars}")


def series_add(f: GradedSeries, g: GradedSeries) -> GradedSeries:
    _check_compatible(f, g)
    if f.degree != g.degree:
        raise SeriesError(f"degree mismatch: {f.degree} vs {g.degree}")
    out = dict(f.terms)
    for e, c in g.terms.items():
        a = out.get(e)
        if a is None:
            out[e] = c
        else:
            s = tuple(x + y for x, y in zip(a, c))
            if any(s):
                out[e] = s
            else:
                del out[e]
    return GradedSeries(f.ring, f.nvars, f.degree, out)


def series_neg(f: GradedSeries) -> GradedSeries:
    return GradedSeries(f.ring, f.nvars, f.degree,
                        {e: tuple(-x for x in c) for e, c in f.terms.items()})


def series_sum(items: Iterable[GradedSeries], ring: GradedRing, nvars: int, degree: int) -> GradedSeries:
    out = zero(ring, nvars, degree)
    for s in items:
        out = series_add(out, s)
    return out


def series_mul(f: GradedSeries, g: GradedSeries) -> GradedSeries:
    _check_compatible(f, g)
    terms = mul_terms(f.terms, f.degree, g.terms, g.degree, f.ring.bound, f.ring.table)
    return GradedSeries(f.ring, f.nvars, f.degree + g.degree, terms)


def scale(f: GradedSeries, piece: int, value: Sequence[int]) -> GradedSeries:
    """Multiply by the ring element ``value`` of piece ``piece``."""
    return series_mul(constant(f.ring, f.nvars, piece, value), f) if any(value) else \
        zero(f.ring, f.nvars, f.degree - piece)


def integer_multiple(f: GradedSeries, n: int) -> GradedSeries:
    if n == 0:
        return zero(f.ring, f.nvars, f.degree)
    return GradedSeries(f.ring, f.nvars, f.degree,
                        {e: tuple(n * x for x in c) for e, c in f.terms.items()})


def powers(f: GradedSeries, top: int) -> list[GradedSeries]:
    """``[1, f, f^2, ..., f^top]`` (truncated)."""
    out = [one(f.ring, f.nvars)]
    for _ in range(top):
        out.append(series_mul(out[-1], f))
    return out


# ---------------------------------------------------------------------------
# formal group law calculus
# ---------------------------------------------------------------------------

def _check_chern(*fs: GradedSeries):
    for f in fs:
        if not is_chern_element(f):
            raise SeriesError("expected a degree-1 series without constant term")


def fgl_sum(f: GradedSeries, g: GradedSeries) -> GradedSeries:
    """Formal sum ``F(f, g) = f + g + sum a_ij f^i g^j``."""
    _check_compatible(f, g)
    _check_chern(f, g)
    ring, D = f.ring, f.ring.bound
    out = series_add(f, g)
    if not ring.fgl_coefficients or f.is_zero() or g.is_zero():
        return out
    fp = powers(f, D - 1)
    gp = powers(g, D - 1)
    # F - f - g = sum_i f^i * (sum_j a_ij g^j), grouped to save products
    for i in range(1, D):
        inner = zero(ring, f.nvars, 1 - i)
        for j in range(1, D - i + 1):
            a = ring.fgl_coefficient(i, j)
            if any(a):
                inner = series_add(inner, scale(gp[j], i + j - 1, a))
        if not inner.is_zero():
            out = series_add(out, series_mul(fp[i], inner))
    return out


@lru_cache(maxsize=None)
def inverse_series(ring: GradedRing) -> GradedSeries:
    """The series ``chi(u)`` with ``F(u, chi(u)) = 0``, solved degree by degree."""
    u = variable(ring, 1, 0)
    chi = series_neg(u)
    for n in range(2, ring.bound + 1):
        resid = fgl_sum(u, chi).coefficient((n,))
        if any(resid):
            # adding delta*u^n to chi shifts the u^n coefficient of F(u, chi) by delta
            chi = series_add(chi, GradedSeries(ring, 1, 1, {(n,): tuple(-x for x in resid)}))
    return chi


@lru_cache(maxsize=None)
def n_series(ring: GradedRing, n: int) -> GradedSeries:
    """``[n]_F u`` in one variable; ``[-1]u`` is the inverse series."""
    if n == 0:
        return zero(ring, 1, 1)
    if n == 1:
        return variable(ring, 1, 0)
    if n < 0:
        return substitute(n_series(ring, -n), [inverse_series(ring)])
    half = n // 2
    a = n_series(ring, half)
    return fgl_sum(a, n_series(ring, n - half))


def multiply_by_integer(f: GradedSeries, n: int) -> GradedSeries:
    """Formal multiple ``[n]_F f``."""
    _check_chern(f)
    if n == 0:
        return zero(f.ring, f.nvars, 1)
    if n == 1:
        return f
    return substitute(n_series(f.ring, n), [f])


def formal_linear_combination(coeffs: Sequence[int], elements: Sequence[GradedSeries], *,
                              ring: GradedRing | None = None, nvars: int | None = None) -> GradedSeries:
    """Left-to-right fold ``[c_1] x_1 +_F [c_2] x_2 +_F ...``.

    ``ring``/``nvars`` are only needed when ``elements`` is empty (the result
    is then the zero series).
    """
    if len(coeffs) != len(elements):
        raise SeriesError("one coefficient per element required")
    if elements:
        ring, nvars = elements[0].ring, elements[0].nvars
    elif ring is None or nvars is None:
        raise SeriesError("ring and nvars required for an empty combination")
    acc = zero(ring, nvars, 1)
    for c, x in zip(coeffs, elements):
        if c:
            acc = fgl_sum(acc, multiply_by_integer(x, c))
    return acc


def substitute(f: GradedSeries, images: Sequence[GradedSeries], *,
               ring: GradedRing | None = None, nvars: int | None = None) -> GradedSeries:
    """Ring homomorphism ``t_i -> images[i]`` applied to ``f``.

    Images must be degree-1 series without constant term in a common ring
    and variable count (``nvars`` is needed only when ``images`` is empty,
    e.g. restriction to the zero cone).
    """
    if len(images) != f.nvars:
        raise SeriesError(f"need {f.nvars} images, got {len(images)}")
    if images:
        nvars = images[0].nvars
        for g in images:
            if g.ring is not f.ring or g.nvars != nvars:
                raise SeriesError("images must share the ring and variable count of the target")
            if g.degree != 1:
                raise SeriesError("images must have degree 1")
            if (0,) * nvars in g.terms:
                raise SeriesError("image with non-zero constant term")
    elif nvars is None:
        nvars = 0
    if ring is not None and ring is not f.ring:
        raise SeriesError("ring mismatch")
    return MonomialImages(f.ring, list(images), nvars).apply(f)


class MonomialImages:
    """Cache of ``prod images[i]^I_i`` used to apply one substitution many times."""

    def __init__(self, ring: GradedRing, images: list[GradedSeries], nvars: int):
        self.ring = ring
        self.images = images
        self.nvars = nvars
        self._cache: dict[Exponent, GradedSeries] = {(0,) * len(images): one(ring, nvars)}

    def monomial(self, e: Exponent) -> GradedSeries:
        got = self._cache.get(e)
        if got is None:
            k = max(i for i, x in enumerate(e) if x)
            prev = e[:k] + (e[k] - 1,) + e[k + 1:]
            got = series_mul(self.monomial(prev), self.images[k])
            self._cache[e] = got
        return got

    def apply(self, f: GradedSeries) -> GradedSeries:
        out = zero(self.ring, self.nvars, f.degree)
        for e, c in f.sorted_terms():
            m = self.monomial(e)
            if m.is_zero():
                continue
            out = series_add(out, scale(m, sum(e) - f.degree, c))
        return out
