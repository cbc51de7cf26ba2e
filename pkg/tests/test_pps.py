from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from fglfans.fan import Cone, Fan, star_subdivision
from fglfans.fgl import multiply_by_integer, n_series, variable, variables, zero
from fglfans.lazard import build_lazard, graded_rank, partition_count, specialize_additive, specialize_multiplicative
from fglfans.pps import (Domain, PiecewiseSeries, SheafError, build_stalk, constant_section, global_sections,
                         is_global_section, lattice_restriction, pps_multiply, pullback_subdivision, restrict_to_star,
                         restriction, restriction_chain_defect, specialize_section)
from fglfans.intlin import rank_q

P1 = Fan.from_cones(1, [(1,), (-1,)], [[0], [1]])
A2 = Fan.from_cones(2, [(1, 0), (0, 1)], [[0, 1]])
P2 = Fan.from_cones(2, [(1, 0), (0, 1), (-1, -1)], [[0, 1], [1, 2], [0, 2]])
E1, E2 = (1, 0), (0, 1)


def section(fan, ring, degree, values):
    return PiecewiseSeries(Domain(fan), ring, degree, values)


# -- stalks and restrictions ----------------------------------------------------

def test_stalk_examples(lazard3):
    assert build_stalk(Cone(2, ()), lazard3).nvars == 0
    assert build_stalk(Cone(2, (E1, E2)), lazard3).nvars == 2
    st = build_stalk(Cone(2, ((1, 2),)), lazard3)
    assert st.nvars == 1 and st.lattice_coordinates((2, 4)) == (2,)
    with pytest.raises(SheafError):
        st.lattice_coordinates((1, 0))


def test_stalk_basis_is_unimodular(corpus):
    for f in corpus.values():
        for key in f.cones:
            b = f.cone(key).lattice_basis()
            assert b.is_unimodular()


def test_restriction_identity(lazard3):
    sigma = Cone(2, (E1, (1, 2)))
    rm = restriction(sigma, sigma, lazard3)
    assert rm.matrix == ((1, 0), (0, 1))
    for t in variables(lazard3, 2):
        assert rm(t) == t


def test_restriction_to_coordinate_ray(lazard3):
    rm = restriction(Cone(2, (E1, E2)), Cone(2, (E1,)), lazard3)
    u = variable(lazard3, 1, 0)
    assert rm.images == [u, zero(lazard3, 1)]


def test_restriction_with_formal_correction(lazard3):
    sigma, tau = Cone(2, (E1, (1, 2))), Cone(2, ((1, 2),))
    rm = restriction(sigma, tau, lazard3)
    assert rm.matrix == ((1,), (2,))
    u = variable(lazard3, 1, 0)
    assert rm.images[0] == u
    two_u = rm.images[1]
    assert two_u.linear_part() == {0: 2}
    assert two_u == multiply_by_integer(u, 2) == n_series(lazard3, 2)
    # [2]u = u +_F u = 2u + a11 u^2 + (a12 + a21) u^3
    assert two_u.coefficient((2,)) == lazard3.fgl_coefficient(1, 1)
    a12 = lazard3.fgl_coefficient(1, 2)
    assert two_u.coefficient((3,)) == tuple(2 * x for x in a12)


def test_restriction_rejects_non_face(lazard3):
    with pytest.raises(SheafError):
        restriction(Cone(2, (E1, E2)), Cone(2, ((1, 1),)), lazard3)


def test_linear_parts_match_lattice_map(corpus, lazard3):
    for f in corpus.values():
        for key in f.cones:
            for face in f.faces_of(key):
                rm = lattice_restriction(f.cone(key), f.cone(face), lazard3)
                for row, img in zip(rm.matrix, rm.images):
                    assert img.linear_part() == {k: c for k, c in enumerate(row) if c}
                # column k holds the coordinates of the k-th face basis vector
                src = f.cone(key).lattice_basis()
                tgt = f.cone(face).lattice_basis()
                for k in range(f.cone(face).dim):
                    v = [sum(rm.matrix[i][k] * src.entries[i][j] for i in range(f.cone(key).dim))
                         for j in range(f.rank)]
                    assert tuple(v) == tgt.entries[k]


def test_smooth_stalks_restrict_by_projection(corpus, lazard3):
    # on smooth cones the ray generators are the basis, so restrictions are coordinate projections
    sigma = Cone(3, ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    for face in [Cone(3, ((1, 0, 0), (0, 0, 1))), Cone(3, ((0, 1, 0),))]:
        rm = lattice_restriction(sigma, face, lazard3)
        for row in rm.matrix:
            assert all(x in (0, 1) for x in row) and sum(row) <= 1


@pytest.mark.parametrize("name", ["A2", "P1", "P2", "P1xP1", "quadric", "square_cone", "blowup_P2"])
def test_sheaf_functoriality(name, corpus, lazard3):
    f = corpus[name]
    for key in f.cones:
        faces = f.faces_of(key)
        for tau in faces:
            for rho in f.faces_of(tau):
                chain = (f.cone(key), f.cone(tau), f.cone(rho))
                assert restriction_chain_defect(chain, lazard3) == []


# -- sections -------------------------------------------------------------------

def test_global_section_examples(lazard3):
    for fan in (P1, A2, P2):
        assert is_global_section(constant_section(fan, lazard3))
    plus, minus = P1.key_of([(1,)]), P1.key_of([(-1,)])
    t = variable(lazard3, 1, 0)
    assert is_global_section(section(P1, lazard3, 1, {plus: t, minus: zero(lazard3, 1)}))
    one = constant_section(P1, lazard3).values[plus]
    assert not is_global_section(section(P1, lazard3, 0, {plus: one, minus: zero(lazard3, 1, 0)}))


def test_section_rejects_wrong_stalk(lazard3):
    key = A2.maximal[0]
    with pytest.raises(SheafError):
        section(A2, lazard3, 1, {key: variable(lazard3, 1, 0)})


def test_p1_rank_in_degree_one(lazard3):
    assert global_sections(P1, 1, lazard3).rank == 8


@pytest.mark.parametrize("n", [1, 2, 3])
def test_single_cone_rank_formula(n, lazard3):
    cone = Fan.from_cones(n, [tuple(int(i == j) for j in range(n)) for i in range(n)], [list(range(n))])
    for d in range(-3, 4):
        want = sum(comb(k + n - 1, n - 1) * partition_count(k - d)
                   for k in range(max(d, 0), 4) if k - d <= 3)
        assert global_sections(cone, d, lazard3).rank == want


def test_origin_fan_rank(lazard3):
    origin = Fan.from_cones(2, [], [[]])
    for d in range(-4, 3):
        want = graded_rank(lazard3, -d).rank if -3 <= d <= 0 else 0
        assert global_sections(origin, d, lazard3).rank == want


def test_basis_sections_are_global(corpus, lazard3):
    for name in ("P2", "quadric", "square_cone"):
        mod = global_sections(corpus[name], 1, lazard3)
        assert all(is_global_section(p) for p in mod.sections())


def test_pairwise_matches_all_faces(corpus, lazard3):
    for f in corpus.values():
        for d in (0, 1, 2):
            a = global_sections(f, d, lazard3)
            b = global_sections(f, d, lazard3, all_faces=True)
            assert a.hermite() == b.hermite()
            assert all(is_global_section(p, all_faces=True) for p in a.sections())


def test_multiplication_closure(corpus, lazard3):
    for name in ("P1", "P2", "quadric"):
        f = corpus[name]
        one = constant_section(f, lazard3)
        deg0 = global_sections(f, 0, lazard3)
        assert rank_q(deg0.basis + [tuple(one.to_vector())]) == deg0.rank
        secs = global_sections(f, 1, lazard3).sections()
        for p in secs[:4]:
            assert pps_multiply(p, one) == p
            for q in secs[:4]:
                r = pps_multiply(p, q)
                assert r.degree == 2 and is_global_section(r)
        z = constant_section(f, lazard3, value=(0,))
        assert all(v.is_zero() for v in pps_multiply(secs[0], z).values.values())


def test_multiplication_domain_mismatch(lazard3):
    with pytest.raises(SheafError):
        pps_multiply(constant_section(P1, lazard3), constant_section(P2, lazard3))


def test_restrict_to_star(lazard3):
    p = global_sections(P2, 1, lazard3).sections()[0]
    assert restrict_to_star(p, ()) == p
    e1 = P2.key_of([E1])
    r = restrict_to_star(p, e1)
    assert set(r.values) == {k for k in P2.maximal if set(e1) <= set(k)} and len(r.values) == 2
    top = P2.maximal[0]
    assert list(restrict_to_star(p, top).values) == [top]
    assert is_global_section(r)
    with pytest.raises(Exception):
        restrict_to_star(p, (0, 1, 2))


def test_pullback_examples(lazard3):
    m = star_subdivision(A2, (1, 1))
    t1 = variable(lazard3, 2, 0)
    p = section(A2, lazard3, 1, {A2.maximal[0]: t1})
    q = pullback_subdivision(m, p)
    assert is_global_section(q)
    # the two new cones agree on the new ray
    new = m.source.key_of([(1, 1)])
    images = [lattice_restriction(m.source.cone(k), m.source.cone(new), lazard3)(q.values[k])
              for k in m.source.maximal]
    assert images[0] == images[1]
    assert images[0].linear_part() == {0: 1}
    one = constant_section(A2, lazard3)
    assert pullback_subdivision(m, one) == constant_section(m.source, lazard3)


def test_pullback_is_ring_map_and_injective(corpus, lazard3):
    for name, center in [("P2", (1, 1)), ("quadric", (1, 0)), ("P1xP1", (1, 1))]:
        f = corpus[name]
        m = star_subdivision(f, center)
        for d in (0, 1):
            mod = global_sections(f, d, lazard3)
            secs = mod.sections()
            images = [pullback_subdivision(m, p) for p in secs]
            assert all(is_global_section(q) for q in images)
            assert rank_q([tuple(q.to_vector()) for q in images]) == mod.rank
        s1 = global_sections(f, 1, lazard3).sections()[:3]
        for p in s1:
            for q in s1:
                assert pullback_subdivision(m, p * q) == pullback_subdivision(m, p) * pullback_subdivision(m, q)


def test_specialization_naturality(corpus, lazard3):
    for spec in (specialize_additive(lazard3), specialize_multiplicative(lazard3)):
        for name in ("P2", "quadric", "square_cone"):
            for p in global_sections(corpus[name], 1, lazard3).sections():
                assert is_global_section(specialize_section(spec, p))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([((1, 0), (0, 1)), ((2, 1), (1, 1)), ((1, 3), (0, 1)), ((-1, 2), (1, -1))]))
def test_ranks_independent_of_lattice_basis(g):
    # a GL(2, Z) change of coordinates of the fan does not change ranks
    ring = build_lazard(3)
    assert abs(g[0][0] * g[1][1] - g[0][1] * g[1][0]) == 1
    rays = [(1, 0), (0, 1), (-1, -1)]
    moved = [tuple(sum(g[i][j] * r[j] for j in range(2)) for i in range(2)) for r in rays]
    f = Fan.from_cones(2, moved, [[0, 1], [1, 2], [0, 2]])
    for d in (0, 1, 2):
        assert global_sections(f, d, ring).rank == global_sections(P2, d, ring).rank


def test_degree_above_bound_is_zero(lazard3):
    assert global_sections(P2, 4, lazard3).rank == 0
