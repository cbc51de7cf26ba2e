import json

import pytest

from fglfans import descent
from fglfans.descent import (DescentSquare, RouteMismatchError, check_cartesian, compute_via_resolution,
                             descend_chain, identity_subdivision, pullback_kernel_rank, report_json, star_pullback)
from fglfans.fan import STRATEGIES, Fan, resolve, star_subdivision
from fglfans.pps import Domain, global_sections, restrict_to_star

A2 = Fan.from_cones(2, [(1, 0), (0, 1)], [[0, 1]])
P2 = Fan.from_cones(2, [(1, 0), (0, 1), (-1, -1)], [[0, 1], [1, 2], [0, 2]])
QUADRIC = Fan.from_cones(2, [(0, 1), (2, -1)], [[0, 1]])


@pytest.mark.parametrize("d", [0, 1, 2])
def test_a2_blowup_square_is_cartesian(d, lazard3):
    rep = check_cartesian(DescentSquare(star_subdivision(A2, (1, 1)), lazard3, d))
    assert rep.commutes and rep.injective and rep.exact, rep.witness
    assert rep.ranks["fiber_product"] == rep.ranks["delta"]


@pytest.mark.parametrize("d", [0, 1, 2])
def test_quadric_resolution_square_is_cartesian(d, lazard3):
    (step,) = resolve(QUADRIC)
    rep = check_cartesian(DescentSquare(step, lazard3, d))
    assert rep.cartesian, rep.witness


def test_identity_square(lazard3):
    sq = DescentSquare(identity_subdivision(P2), lazard3, 1)
    rep = check_cartesian(sq)
    assert rep.cartesian
    r = rep.ranks
    assert r["delta"] == r["delta_prime"] == r["star_pi"] == r["star_rho"]


def test_squares_over_specializations(additive3, mult3):
    m = star_subdivision(P2, (1, 1))
    for ring in (additive3, mult3):
        for d in (0, 1, 2):
            assert check_cartesian(DescentSquare(m, ring, d)).cartesian


def test_star_pullback_requires_star_of_pi(lazard3):
    m = star_subdivision(A2, (1, 1))
    p = global_sections(A2, 1, lazard3).sections()[0]
    s = restrict_to_star(p, m.pi)
    t = star_pullback(m, s)
    assert t.domain == Domain(m.source, m.rho)
    with pytest.raises(ValueError):
        star_pullback(m, global_sections(P2, 1, lazard3).sections()[0])


def test_pullback_kernel_is_zero(lazard3):
    for m in [star_subdivision(P2, (1, 1)), *resolve(QUADRIC)]:
        for d in range(4):
            assert pullback_kernel_rank(m, d, lazard3) == 0


def test_broken_gluing_is_reported(lazard3, monkeypatch):
    real = descent.fiber_product
    monkeypatch.setattr(descent, "fiber_product", lambda *a: real(*a)[:-1])
    rep = check_cartesian(DescentSquare(star_subdivision(A2, (1, 1)), lazard3, 1))
    assert not rep.exact and not rep.cartesian and "fiber product" in rep.witness
    assert "NOT Cartesian" in str(rep)
    with pytest.raises(RouteMismatchError):
        compute_via_resolution(QUADRIC, 1, lazard3)
    _, report = compute_via_resolution(QUADRIC, 1, lazard3, strict=False)
    assert not report.agree


@pytest.mark.parametrize("strategy", STRATEGIES)
@pytest.mark.parametrize("name", ["quadric", "square_cone", "P2"])
def test_routes_agree(name, strategy, corpus, lazard3):
    for d in (0, 1, 2):
        module, rep = compute_via_resolution(corpus[name], d, lazard3, strategy)
        assert rep.agree and rep.glued_rank == rep.direct_rank == module.rank
        assert rep.step_ranks[-1] == rep.direct_rank


def test_square_cone_orders_differ_but_agree(corpus, lazard3):
    f = corpus["square_cone"]
    chains = {s: resolve(f, s) for s in STRATEGIES}
    assert [m.center for m in chains["min"]] != [m.center for m in chains["max"]]
    d = 1
    mods = [descend_chain(chains[s], d, lazard3)[0] for s in STRATEGIES]
    assert mods[0].hermite() == mods[1].hermite() == global_sections(f, d, lazard3).hermite()


def test_explicit_chain_on_p2(lazard3):
    m1 = star_subdivision(P2, (1, 1))
    m2 = star_subdivision(m1.source, (-1, 0))
    for d in (0, 1, 2):
        _, rep = compute_via_resolution(P2, d, lazard3, [m1, m2])
        assert rep.agree and rep.strategy == "explicit" and rep.steps == 2
    with pytest.raises(ValueError):
        compute_via_resolution(A2, 1, lazard3, [m1])
    with pytest.raises(ValueError):
        descend_chain([m2, m1], 1, lazard3)


def test_reports_serialize(lazard3):
    rep = check_cartesian(DescentSquare(star_subdivision(A2, (1, 1)), lazard3, 1))
    data = json.loads(json.dumps(rep.to_json()))
    assert data["cartesian"] is True and data["witness"] is None
    _, route = compute_via_resolution(QUADRIC, 1, lazard3)
    out = json.loads(report_json([route]))
    assert out[0]["agree"] is True and out[0]["steps"] == 1
