"""Rational polyhedral fans: faces, stars, smoothness, star subdivisions.

A :class:`Fan` keeps one global table of primitive ray generators (sorted
lexicographically) and stores cones as sorted tuples of ray indices, closed
under faces.  Geometry is exact: face lattices come from supporting
hyperplanes computed with integer kernels, containment from the resulting
H-representation.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

from . import intlin

Vector = tuple[int, ...]
ConeKey = tuple[int, ...]


class FanError(ValueError):
    """Invalid fan data or an operation outside its preconditions."""


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


@dataclass(frozen=True)
class Cone:
    """Cone generated by primitive rays in ``Z^ambient_rank``."""

    ambient_rank: int
    rays: tuple[Vector, ...]

    def __post_init__(self):
        object.__setattr__(self, "rays", tuple(sorted(tuple(r) for r in self.rays)))
        if any(len(r) != self.ambient_rank for r in self.rays):
            raise FanError("ray has the wrong length")

    @cached_property
    def dim(self) -> int:
        return intlin.rank_q(self.rays) if self.rays else 0

    @cached_property
    def equations(self) -> tuple[Vector, ...]:
        """Integer basis of the functionals vanishing on the span."""
        if not self.rays:
            return tuple(tuple(int(i == j) for j in range(self.ambient_rank)) for i in range(self.ambient_rank))
        m = intlin.IntMatrix.from_rows(self.rays)
        return intlin.integer_kernel(m).basis

    @cached_property
    def facets(self) -> tuple[tuple[tuple[Vector, ...], Vector], ...]:
        """``(facet rays, inward normal)`` pairs."""
        d = self.dim
        if d == 0:
            return ()
        found: dict[tuple[Vector, ...], Vector] = {}
        for subset in itertools.combinations(self.rays, d - 1):
            if d > 1 and intlin.rank_q(subset) != d - 1:
                continue
            if subset:
                ker = intlin.integer_kernel(intlin.IntMatrix.from_rows(subset)).basis
            else:
                ker = tuple(tuple(int(i == j) for j in range(self.ambient_rank)) for i in range(self.ambient_rank))
            w = next((k for k in ker if any(_dot(k, r) for r in self.rays)), None)
            if w is None:
                continue
            vals = [_dot(w, r) for r in self.rays]
            if all(x >= 0 for x in vals):
                pass
            elif all(x <= 0 for x in vals):
                w = tuple(-x for x in w)
            else:
                continue
            facet = tuple(r for r in self.rays if _dot(w, r) == 0)
            found.setdefault(facet, w)
        return tuple(sorted(found.items()))

    def contains(self, v: Sequence[int]) -> bool:
        if any(_dot(e, v) for e in self.equations):
            return False
        return all(_dot(w, v) >= 0 for _, w in self.facets)

    def in_relative_interior(self, v: Sequence[int]) -> bool:
        if any(_dot(e, v) for e in self.equations):
            return False
        return all(_dot(w, v) > 0 for _, w in self.facets)

    def face_ray_sets(self) -> list[tuple[Vector, ...]]:
        """Ray sets of all faces, including the cone itself and (if pointed) the empty set."""
        seen = {self.rays}
        stack = [self]
        while stack:
            c = stack.pop()
            for facet_rays, _ in c.facets:
                if facet_rays not in seen:
                    seen.add(facet_rays)
                    stack.append(Cone(self.ambient_rank, facet_rays))
        return sorted(seen, key=lambda rs: (len(rs), rs))

    def is_pointed(self) -> bool:
        return () in self.face_ray_sets()

    def is_simplicial(self) -> bool:
        return len(self.rays) == self.dim

    def multiplicity(self) -> int:
        """Index of the ray lattice in ``span ∩ N`` (simplicial cones only)."""
        if not self.is_simplicial():
            raise FanError("multiplicity is defined for simplicial cones")
        if not self.rays:
            return 1
        return intlin.lattice_index(intlin.LatticeSubspace(self.ambient_rank, self.rays))

    def lattice_basis(self) -> intlin.IntMatrix:
        """Unimodular matrix whose first ``dim`` rows are a basis of ``span ∩ N``."""
        if not self.rays:
            return intlin.IntMatrix.identity(self.ambient_rank)
        sat = intlin.saturate(intlin.LatticeSubspace.span(self.rays, self.ambient_rank))
        return intlin.extend_to_basis(sat)

    def __str__(self):
        return "cone(" + ", ".join(str(list(r)) for r in self.rays) + ")"


def faces(c: Cone) -> list[Cone]:
    """All faces of ``c``, from the zero cone up to ``c`` itself."""
    return [Cone(c.ambient_rank, rs) for rs in c.face_ray_sets()]


def is_smooth(c: Cone) -> bool:
    """Ray generators extend to a basis of the lattice."""
    return c.is_simplicial() and c.multiplicity() == 1


def is_primitive(v: Sequence[int]) -> bool:
    g = 0
    for x in v:
        g = gcd(g, x)
    return g == 1


# ---------------------------------------------------------------------------
# fans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fan:
    """Fan with canonical (lexicographically sorted) rays; cones closed under faces."""

    rank: int
    rays: tuple[Vector, ...]
    maximal: tuple[ConeKey, ...]
    cones: tuple[ConeKey, ...] = field(default=(), compare=False)

    @classmethod
    def from_cones(cls, rank: int, rays: Iterable[Sequence[int]], cones: Iterable[Iterable[int]]) -> "Fan":
        """Build from rays and (maximal or arbitrary) cones, canonicalizing order.

        Faces of each cone are generated from the geometry; malformed input
        is kept as far as possible so :func:`validate_fan` can report it.
        """
        rays = [tuple(int(x) for x in r) for r in rays]
        if any(len(r) != rank for r in rays):
            raise FanError("ray of the wrong length")
        order = sorted(range(len(rays)), key=lambda i: rays[i])
        if len({rays[i] for i in order}) != len(rays):
            raise FanError("duplicate rays")
        new_index = {old: new for new, old in enumerate(order)}
        canon_rays = tuple(rays[i] for i in order)
        given = {tuple(sorted(new_index[i] for i in c)) for c in cones}
        pos = {r: i for i, r in enumerate(canon_rays)}
        all_cones: set[ConeKey] = {()}
        for key in given:
            cone = Cone(rank, tuple(canon_rays[i] for i in key))
            for rs in cone.face_ray_sets():
                all_cones.add(tuple(sorted(pos[r] for r in rs)))
            all_cones.add(key)
        maximal = tuple(sorted((k for k in all_cones if not any(set(k) < set(o) for o in all_cones)),
                               key=lambda k: (len(k), k)))
        ordered = tuple(sorted(all_cones, key=lambda k: (len(k), k)))
        return cls(rank, canon_rays, maximal, ordered)

    @classmethod
    def from_json(cls, data: dict | str) -> "Fan":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls.from_cones(int(data["rank"]), data["rays"], data["cones"])
        except (KeyError, TypeError) as exc:
            raise FanError(f"malformed fan JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> "Fan":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {"rank": self.rank, "rays": [list(r) for r in self.rays],
                "cones": [list(k) for k in self.maximal]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    # -- cones -----------------------------------------------------------------
    def cone(self, key: Sequence[int]) -> Cone:
        return _cone_cache(self.rank, tuple(self.rays[i] for i in key))

    def key_of(self, rays: Iterable[Sequence[int]]) -> ConeKey:
        pos = {r: i for i, r in enumerate(self.rays)}
        return tuple(sorted(pos[tuple(r)] for r in rays))

    def __contains__(self, key) -> bool:
        return tuple(key) in set(self.cones)

    def faces_of(self, key: ConeKey) -> list[ConeKey]:
        s = set(key)
        return [k for k in self.cones if set(k) <= s]

    def is_face(self, small: ConeKey, big: ConeKey) -> bool:
        return set(small) <= set(big) and tuple(small) in self.cone_set

    @cached_property
    def cone_set(self) -> frozenset:
        return frozenset(self.cones)

    def smallest_cone_containing(self, vectors: Sequence[Sequence[int]]) -> ConeKey | None:
        """Smallest cone of the fan containing all ``vectors`` (None if outside the support)."""
        for key in self.cones:
            c = self.cone(key)
            if all(c.contains(v) for v in vectors):
                return key
        return None

    def in_support(self, v: Sequence[int]) -> bool:
        return any(self.cone(k).contains(v) for k in self.maximal)

    def is_smooth(self) -> bool:
        return all(is_smooth(self.cone(k)) for k in self.maximal)

    def is_complete(self) -> bool:
        """Support is all of R^n (checked by probing ± unit vectors and their sums)."""
        probes = set()
        for signs in itertools.product((-1, 0, 1), repeat=self.rank):
            if any(signs):
                probes.add(signs)
        return all(self.in_support(p) for p in probes)

    def __str__(self):
        return f"Fan(rank={self.rank}, rays={[list(r) for r in self.rays]}, maximal={[list(k) for k in self.maximal]})"


_CONE_CACHE: dict = {}


def _cone_cache(rank, rays) -> Cone:
    key = (rank, rays)
    c = _CONE_CACHE.get(key)
    if c is None:
        c = _CONE_CACHE[key] = Cone(rank, rays)
    return c


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        return "valid" if self.ok else "invalid:\n" + "\n".join("  - " + v for v in self.violations)


def validate_fan(f: Fan) -> ValidationReport:
    """Check rays, cones and pairwise intersections; list every violation."""
    bad = []
    for i, r in enumerate(f.rays):
        if not any(r):
            bad.append(f"ray {i} is zero")
        elif not is_primitive(r):
            bad.append(f"ray {i} {list(r)} is not primitive")
    for key in f.maximal:
        c = f.cone(key)
        rsets = c.face_ray_sets()
        if () not in rsets:
            bad.append(f"cone {list(key)} is not strongly convex")
        for r in c.rays:
            if (r,) not in rsets:
                bad.append(f"cone {list(key)}: ray {list(r)} is not an extreme ray")
    for k1, k2 in itertools.combinations(f.maximal, 2):
        common = tuple(sorted(set(k1) & set(k2)))
        c1, c2 = f.cone(k1), f.cone(k2)
        tau = f.cone(common)
        if tau.rays not in c1.face_ray_sets() or tau.rays not in c2.face_ray_sets():
            bad.append(f"cones {list(k1)} and {list(k2)}: common rays do not span a common face")
            continue
        if not all(tau.contains(x) for x in intersection_rays(c1, c2)):
            bad.append(f"cones {list(k1)} and {list(k2)} overlap beyond a common face")
    return ValidationReport(bad)


def intersection_rays(c1: Cone, c2: Cone) -> list[Vector]:
    """Extreme rays of ``c1 ∩ c2`` (both pointed), by exact vertex enumeration."""
    n = c1.ambient_rank
    eqs = list(c1.equations) + list(c2.equations)
    if eqs:
        space = intlin.integer_kernel(intlin.IntMatrix.from_rows(eqs)).basis
    else:
        space = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    k = len(space)
    if k == 0:
        return []
    ineqs = [w for _, w in c1.facets] + [w for _, w in c2.facets]
    # inequalities in the coordinates of ``space``
    a = [tuple(_dot(w, b) for b in space) for w in ineqs]
    out = set()
    for subset in itertools.combinations(a, k - 1):
        if subset:
            ker = intlin.integer_kernel(intlin.IntMatrix.from_rows(subset)).basis
            if len(ker) != 1:
                continue
            y = ker[0]
        else:
            if k != 1:
                continue
            y = (1,)
        for sign in (1, -1):
            ys = tuple(sign * x for x in y)
            if all(_dot(row, ys) >= 0 for row in a):
                x = tuple(sum(ys[i] * space[i][j] for i in range(k)) for j in range(n))
                out.add(intlin.primitive(x))
    return sorted(out)


def star(f: Fan, rho: ConeKey) -> list[ConeKey]:
    """All cones of ``f`` having ``rho`` as a face."""
    rho = tuple(rho)
    if rho not in f.cone_set:
        raise FanError(f"{list(rho)} is not a cone of the fan")
    s = set(rho)
    return [k for k in f.cones if s <= set(k)]


def star_maximal(f: Fan, rho: ConeKey) -> list[ConeKey]:
    """Maximal cones of the star (they are maximal cones of ``f``)."""
    s = set(rho)
    return [k for k in f.maximal if s <= set(k)]


# ---------------------------------------------------------------------------
# star subdivisions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubdivisionMap:
    """Star subdivision ``source -> target`` at ``center`` with its cone map ``phi``.

    ``phi[sigma]`` is the smallest cone of ``target`` containing ``sigma``;
    ``pi`` is the cone of ``target`` with the center in its relative
    interior and ``rho`` the new ray of ``source``.
    """

    source: Fan
    target: Fan
    center: Vector
    phi: dict
    pi: ConeKey
    rho: ConeKey

    def __hash__(self):
        return hash((self.source, self.target, self.center))


def star_subdivision(f: Fan, v: Sequence[int]) -> SubdivisionMap:
    v = tuple(int(x) for x in v)
    if len(v) != f.rank:
        raise FanError("center has the wrong length")
    if not is_primitive(v):
        raise FanError(f"center {list(v)} is not primitive")
    if v in f.rays:
        raise FanError(f"center {list(v)} is already a ray")
    pi = f.smallest_cone_containing([v])
    if pi is None:
        raise FanError(f"center {list(v)} is outside the support")
    new_cones: set[tuple[Vector, ...]] = set()
    for key in f.cones:
        c = f.cone(key)
        if not c.contains(v):
            new_cones.add(c.rays)
            continue
        for face in c.face_ray_sets():
            if not Cone(f.rank, face).contains(v):
                new_cones.add(tuple(sorted(face + (v,))))
    rays = sorted(set(f.rays) | {v})
    pos = {r: i for i, r in enumerate(rays)}
    source = Fan.from_cones(f.rank, rays, [[pos[r] for r in c] for c in new_cones])
    phi = {}
    for key in source.cones:
        target = f.smallest_cone_containing(source.cone(key).rays)
        assert target is not None
        phi[key] = target
    rho = (source.rays.index(v),)
    return SubdivisionMap(source, f, v, phi, pi, rho)


def parallelepiped_points(c: Cone) -> list[tuple[Vector, tuple[Fraction, ...]]]:
    """Non-zero primitive lattice points ``sum l_i r_i`` with ``0 <= l_i < 1``.

    Returned with their ray coordinates ``l``; simplicial cones only.
    """
    if not c.is_simplicial():
        raise FanError("parallelepiped of a non-simplicial cone")
    d = c.dim
    if d == 0:
        return []
    basis = c.lattice_basis()
    coords = [intlin.solve_unimodular(basis, r)[:d] for r in c.rays]  # d x d
    inv = _rational_inverse(coords)
    ranges = [range(sum(min(0, coords[i][j]) for i in range(d)), sum(max(0, coords[i][j]) for i in range(d)) + 1)
              for j in range(d)]
    out = []
    for y in itertools.product(*ranges):
        if not any(y):
            continue
        lam = tuple(sum(Fraction(y[j]) * inv[j][i] for j in range(d)) for i in range(d))
        if all(0 <= x < 1 for x in lam) and is_primitive(y):
            point = tuple(sum(y[j] * basis[j, k] for j in range(d)) for k in range(c.ambient_rank))
            out.append((point, lam))
    return out


def _rational_inverse(m: list[Sequence[int]]) -> list[list[Fraction]]:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next(i for i in range(col, n) if a[i][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                q = a[i][col]
                a[i] = [x - q * y for x, y in zip(a[i], a[col])]
    return [row[n:] for row in a]


STRATEGIES = ("min", "max")


def next_center(f: Fan, strategy: str = "min") -> tuple[ConeKey, Vector] | None:
    """Cone to fix next and the subdivision center, or None when ``f`` is smooth.

    Non-simplicial cones come first (lowest dimension first), subdivided at
    the primitive vector of their ray sum.  Then simplicial non-smooth cones
    of lowest dimension, subdivided at a fundamental-parallelepiped point of
    minimal (``"min"``) or maximal (``"max"``) coordinate sum.  ``"min"``
    scans cones in canonical order, ``"max"`` in reverse.
    """
    if strategy not in STRATEGIES:
        raise FanError(f"unknown strategy {strategy!r}")
    cones = list(f.cones) if strategy == "min" else list(reversed(f.cones))
    nonsimp = [k for k in cones if not f.cone(k).is_simplicial()]
    if nonsimp:
        low = min(f.cone(k).dim for k in nonsimp)
        key = next(k for k in nonsimp if f.cone(k).dim == low)
        total = tuple(sum(col) for col in zip(*f.cone(key).rays))
        return key, intlin.primitive(total)
    singular = [k for k in cones if not is_smooth(f.cone(k))]
    if not singular:
        return None
    low = min(f.cone(k).dim for k in singular)
    key = next(k for k in singular if f.cone(k).dim == low)
    pts = parallelepiped_points(f.cone(key))
    if strategy == "min":
        point, _ = min(pts, key=lambda p: (sum(p[1]), p[0]))
    else:
        point, _ = max(pts, key=lambda p: (sum(p[1]), p[0]))
    return key, point


def resolve(f: Fan, strategy: str = "min", max_steps: int = 1000) -> list[SubdivisionMap]:
    """Chain of star subdivisions ending in a smooth fan (empty if already smooth)."""
    chain = []
    current = f
    for _ in range(max_steps):
        nxt = next_center(current, strategy)
        if nxt is None:
            return chain
        step = star_subdivision(current, nxt[1])
        chain.append(step)
        current = step.source
    raise FanError("resolution did not terminate")  # pragma: no cover
