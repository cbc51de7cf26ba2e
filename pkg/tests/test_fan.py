import itertools

import pytest
from hypothesis import given, settings, strategies as st

from fglfans.fan import (STRATEGIES, Cone, Fan, FanError, faces, is_smooth, next_center, parallelepiped_points,
                         resolve, star, star_subdivision, validate_fan)
from fglfans.intlin import IntMatrix, invariant_factors

A2 = Fan.from_cones(2, [(1, 0), (0, 1)], [[0, 1]])
P1 = Fan.from_cones(1, [(1,), (-1,)], [[0], [1]])
P2 = Fan.from_cones(2, [(1, 0), (0, 1), (-1, -1)], [[0, 1], [1, 2], [0, 2]])
QUADRIC = Fan.from_cones(2, [(0, 1), (2, -1)], [[0, 1]])
SQUARE = Fan.from_cones(3, [(1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1)], [[0, 1, 2, 3]])


def key(f, *rays):
    return f.key_of(rays)


# -- validation ------------------------------------------------------------------

def test_valid_fans(corpus):
    assert validate_fan(P1).ok
    for f in corpus.values():
        assert validate_fan(f).ok


def test_overlapping_cones_reported():
    f = Fan.from_cones(2, [(1, 0), (0, 1), (1, 1), (1, 2)], [[0, 1], [2, 3]])
    report = validate_fan(f)
    assert not report.ok
    assert any("overlap" in v for v in report.violations)


def test_non_primitive_ray_reported():
    f = Fan.from_cones(2, [(2, 0), (0, 1)], [[0, 1]])
    assert any("not primitive" in v for v in validate_fan(f).violations)


def test_non_pointed_cone_reported():
    f = Fan.from_cones(1, [(1,), (-1,)], [[0, 1]])
    assert not validate_fan(f).ok


def test_canonical_serialization():
    shuffled = Fan.from_cones(2, [(-1, -1), (1, 0), (0, 1)], [[1, 2], [2, 0], [0, 1]])
    assert shuffled == P2
    assert shuffled.dumps() == P2.dumps()
    assert Fan.from_json(P2.dumps()) == P2
    assert P2.dumps() == '{"cones": [[0, 1], [0, 2], [1, 2]], "rank": 2, "rays": [[-1, -1], [0, 1], [1, 0]]}'


# -- faces, stars, smoothness ------------------------------------------------------

def test_faces_examples():
    assert [c.rays for c in faces(Cone(2, ()))] == [()]
    assert len(faces(Cone(2, ((1, 0), (0, 1))))) == 4
    fs = faces(Cone(2, ((1, 0), (1, 2))))
    assert sorted(c.rays for c in fs) == sorted([(), ((1, 0),), ((1, 2),), ((1, 0), (1, 2))])


def test_square_cone_faces():
    c = Cone(3, ((1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1)))
    fs = faces(c)
    assert len(fs) == 1 + 4 + 4 + 1
    assert not c.is_simplicial() and not is_smooth(c)


def test_star_examples():
    assert star(P2, ()) == list(P2.cones)
    e1 = key(P2, (1, 0))
    got = {tuple(sorted(P2.cone(k).rays)) for k in star(P2, e1)}
    want = {((1, 0),), ((0, 1), (1, 0)), ((-1, -1), (1, 0))}
    assert got == want
    top = P2.maximal[0]
    assert star(P2, top) == [top]
    with pytest.raises(FanError):
        star(P2, (0, 1, 2))


def test_star_and_faces_consistent(corpus):
    for f in corpus.values():
        for rho in f.cones:
            for sigma in f.cones:
                assert (sigma in star(f, rho)) == (rho in f.faces_of(sigma))


def test_smoothness_examples():
    assert is_smooth(Cone(2, ((1, 0), (0, 1))))
    quad = Cone(2, ((0, 1), (2, -1)))
    assert not is_smooth(quad) and quad.multiplicity() == 2
    assert invariant_factors(IntMatrix.from_rows(quad.rays)) == [1, 2]


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=4, max_size=4))
def test_smoothness_matches_determinant(entries):
    a, b, c, d = entries
    r1, r2 = (a, b), (c, d)
    det = a * d - b * c
    from math import gcd
    if det == 0 or gcd(a, b) != 1 or gcd(c, d) != 1:
        return
    cone = Cone(2, (r1, r2))
    assert is_smooth(cone) == (abs(det) == 1)
    assert cone.multiplicity() == abs(det)


# -- subdivisions -------------------------------------------------------------------

def test_blowup_of_a2():
    m = star_subdivision(A2, (1, 1))
    src = m.source
    got = sorted(tuple(sorted(src.cone(k).rays)) for k in src.maximal)
    assert got == [((0, 1), (1, 1)), ((1, 0), (1, 1))]
    assert m.phi[key(src, (1, 0), (1, 1))] == key(A2, (1, 0), (0, 1))
    assert m.pi == key(A2, (1, 0), (0, 1)) and m.rho == key(src, (1, 1))


def test_blowup_of_p2():
    m = star_subdivision(P2, (1, 1))
    assert len(m.source.rays) == 4 and len(m.source.maximal) == 4
    assert validate_fan(m.source).ok and m.source.is_complete()


def test_subdivision_errors():
    with pytest.raises(FanError):
        star_subdivision(A2, (-1, 0))
    with pytest.raises(FanError):
        star_subdivision(A2, (1, 0))
    with pytest.raises(FanError):
        star_subdivision(A2, (2, 2))


def subdivision_invariants(m):
    src, tgt = m.source, m.target
    assert validate_fan(src).ok
    for k in src.cones:
        c = src.cone(k)
        # phi(sigma) is the smallest cone of the target containing sigma
        assert all(tgt.cone(m.phi[k]).contains(r) for r in c.rays)
        for face in tgt.faces_of(m.phi[k]):
            if face != m.phi[k]:
                assert not all(tgt.cone(face).contains(r) for r in c.rays)
        # monotone on faces
        for f in src.faces_of(k):
            assert set(m.phi[f]) <= set(m.phi[k])
    # same support: probe lattice points in a box
    for v in itertools.product(range(-2, 3), repeat=src.rank):
        assert src.in_support(v) == tgt.in_support(v)


@pytest.mark.parametrize("fan,center", [(A2, (1, 1)), (P2, (1, 1)), (QUADRIC, (1, 0)), (P2, (-1, 0))])
def test_subdivision_invariants(fan, center):
    subdivision_invariants(star_subdivision(fan, center))


# -- resolution -------------------------------------------------------------------

def test_resolve_examples(corpus):
    assert resolve(P2) == []
    chain = resolve(QUADRIC)
    assert len(chain) == 1 and chain[0].center == (1, 0)
    assert all(is_smooth(chain[0].source.cone(k)) for k in chain[0].source.maximal)
    for strategy in STRATEGIES:
        chain = resolve(SQUARE, strategy)
        assert len(chain) >= 2
        assert chain[-1].source.is_smooth()
        for a, b in zip(chain, chain[1:]):
            assert b.target == a.source
        for m in chain:
            subdivision_invariants(m)


def test_strategies_differ():
    f = Fan.from_cones(2, [(1, 0), (1, 3)], [[0, 1]])
    pts = sorted(p for p, _ in parallelepiped_points(f.cone(f.maximal[0])))
    assert pts == [(1, 1), (1, 2)]
    assert next_center(f, "min")[1] == (1, 1)
    assert next_center(f, "max")[1] == (1, 2)
    for strategy in STRATEGIES:
        assert resolve(f, strategy)[-1].source.is_smooth()
    centers = {s: [m.center for m in resolve(SQUARE, s)] for s in STRATEGIES}
    assert centers["min"] != centers["max"]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 6))
def test_resolution_terminates_on_2d_cones(n, q):
    # cone(e2, n e1 - q e2) with gcd(n, q) = 1
    from math import gcd
    if gcd(n, q) != 1:
        return
    f = Fan.from_cones(2, [(0, 1), (n, -q)], [[0, 1]])
    for strategy in STRATEGIES:
        chain = resolve(f, strategy)
        end = chain[-1].source if chain else f
        assert end.is_smooth()
        assert len(chain) <= n + 1
