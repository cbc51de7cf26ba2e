import pytest
from hypothesis import given, settings, strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors as sympy_invariant_factors

from fglfans import intlin
from fglfans.intlin import (IntLinError, IntMatrix, LatticeSubspace, extend_to_basis, hermite_normal_form,
                            integer_kernel, invariant_factors, is_saturated, kernel_basis, lattice_index,
                            normal_form_in_quotient, saturate, smith_normal_form, solve_unimodular)

M = IntMatrix.from_rows


def matrices(max_rows=4, max_cols=4, lo=-6, hi=6):
    return st.integers(1, max_rows).flatmap(lambda r: st.integers(1, max_cols).flatmap(
        lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c), min_size=r, max_size=r)))


def sympy_factors(rows):
    return [abs(int(x)) for x in sympy_invariant_factors(Matrix(rows), domain=ZZ) if x]


def same_row_lattice(a, b):
    """Row lattices coincide iff stacking either onto the other changes no invariant factor."""
    fa, fb = sympy_factors(a) if a else [], sympy_factors(b) if b else []
    both = [list(r) for r in a] + [list(r) for r in b]
    fab = sympy_factors(both) if both else []
    return fa == fb == fab


# -- smith normal form --------------------------------------------------------

def test_smith_identity():
    u, d, v = smith_normal_form(IntMatrix.identity(2))
    assert u == d == v == IntMatrix.identity(2)


def test_smith_small_example():
    m = M([[2, 4], [6, 8]])
    u, d, v = smith_normal_form(m)
    assert u @ m @ v == d
    assert [d[0, 0], d[1, 1]] == [2, 4]
    assert d[0, 1] == d[1, 0] == 0


def test_smith_zero_matrix():
    u, d, v = smith_normal_form(IntMatrix.zeros(2, 3))
    assert d == IntMatrix.zeros(2, 3)
    assert u == IntMatrix.identity(2) and v == IntMatrix.identity(3)


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_smith_properties(rows):
    m = M(rows)
    u, d, v = smith_normal_form(m)
    assert u @ m @ v == d
    assert u.is_unimodular() and v.is_unimodular()
    diag = [d[i, i] for i in range(min(d.shape))]
    assert all(d[i, j] == 0 for i in range(d.nrows) for j in range(d.ncols) if i != j)
    assert all(x >= 0 for x in diag)
    nz = [x for x in diag if x]
    assert diag[:len(nz)] == nz
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert nz == sympy_factors(rows)


def test_invariant_factors_matches_sympy():
    rows = [[4, 6, 2], [8, 2, 0], [12, 8, 2]]
    assert invariant_factors(M(rows)) == sympy_factors(rows)


# -- hermite normal form ------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(matrices())
def test_hermite_rows_canonical(rows):
    h = hermite_normal_form(M(rows))
    assert same_row_lattice([list(r) for r in h.entries], rows)
    pivots = [next(k for k, x in enumerate(r) if x) for r in h.entries]
    assert pivots == sorted(set(pivots))
    for i, (r, p) in enumerate(zip(h.entries, pivots)):
        assert r[p] > 0
        for j in range(i):
            assert 0 <= h.entries[j][p] < r[p]
    # idempotent and independent of generator order
    assert hermite_normal_form(h) == h
    assert hermite_normal_form(M(list(reversed(rows)))) == h


# -- kernels -----------------------------------------------------------------------

def test_kernel_examples():
    assert integer_kernel(M([[1, -1]])).basis == ((1, 1),)
    assert integer_kernel(IntMatrix.identity(2)).basis == ()
    (k,) = integer_kernel(M([[2, 4]])).basis
    assert 2 * k[0] + 4 * k[1] == 0 and abs(k[0]) == 2 and abs(k[1]) == 1


@settings(max_examples=150, deadline=None)
@given(matrices(max_rows=4, max_cols=6))
def test_kernel_properties(rows):
    m = M(rows)
    k = integer_kernel(m)
    for x in k.basis:
        assert m.apply(x) == (0,) * m.nrows
    assert k.rank == m.ncols - intlin.rank_q(rows)
    assert is_saturated(k)
    assert saturate(k).basis == k.basis


@settings(max_examples=100, deadline=None)
@given(matrices(max_rows=5, max_cols=6, lo=-3, hi=3))
def test_sparse_and_dense_kernels_agree(rows):
    sparse = [{j: x for j, x in enumerate(r) if x} for r in rows]
    a = intlin.hermite_rows(kernel_basis(rows, len(rows[0])), len(rows[0]))
    b = intlin.hermite_rows(kernel_basis(sparse, len(rows[0])), len(rows[0]))
    assert a == b == list(integer_kernel(M(rows)).basis)


# -- saturation and bases ------------------------------------------------------

def test_saturate_examples():
    s = LatticeSubspace(2, ((2, 0),))
    assert saturate(s).basis == ((1, 0),)
    assert lattice_index(s) == 2
    full = LatticeSubspace(2, ((1, 0), (0, 1)))
    assert saturate(full).basis == full.basis
    assert saturate(LatticeSubspace(2, ((1, 2),))).basis == ((1, 2),)


def test_extend_to_basis_examples():
    assert extend_to_basis(LatticeSubspace(2, ((1, 0),))) == IntMatrix.identity(2)
    b = extend_to_basis(LatticeSubspace(2, ((1, 2),)))
    assert b.entries[0] == (1, 2) and abs(b.det()) == 1
    with pytest.raises(IntLinError):
        extend_to_basis(LatticeSubspace(2, ((2, 0),)))


@settings(max_examples=150, deadline=None)
@given(matrices(max_rows=3, max_cols=4))
def test_extend_to_basis_unimodular(rows):
    if intlin.rank_q(rows) == 0:
        return
    s = saturate(LatticeSubspace.span(rows, len(rows[0])))
    b = extend_to_basis(s)
    assert b.is_unimodular()
    assert b.entries[:s.rank] == s.basis
    assert extend_to_basis(s) == b
    for v in rows:
        c = solve_unimodular(b, v)
        assert not any(c[s.rank:])
        assert IntMatrix.from_rows([c]) @ b == IntMatrix.from_rows([v])


# -- quotients ---------------------------------------------------------------

def test_normal_form_examples():
    rel = LatticeSubspace.span([(2, 0)], 2)
    assert normal_form_in_quotient((3, 0), rel) == (1, 0)
    assert normal_form_in_quotient((4, 0), rel) == (0, 0)
    assert normal_form_in_quotient((5, 7), LatticeSubspace(2, ())) == (5, 7)


@settings(max_examples=150, deadline=None)
@given(matrices(max_rows=3, max_cols=3), st.lists(st.integers(-20, 20), min_size=3, max_size=3),
       st.lists(st.integers(-20, 20), min_size=3, max_size=3))
def test_normal_form_properties(rel_rows, a, b):
    rel_rows = [(r + [0, 0, 0])[:3] for r in rel_rows]
    rel = LatticeSubspace.span(rel_rows, 3)
    nf = lambda v: normal_form_in_quotient(v, rel)
    assert nf(nf(a)) == nf(a)
    s = [x + y for x, y in zip(a, b)]
    assert nf(s) == nf([x + y for x, y in zip(nf(a), nf(b))])
    for r in rel_rows:
        assert nf(r) == (0, 0, 0)
        assert nf([x + y for x, y in zip(a, r)]) == nf(a)
    assert rel.contains([x - y for x, y in zip(a, nf(a))])
