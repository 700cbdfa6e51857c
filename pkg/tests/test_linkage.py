import pytest
from hypothesis import given, settings, strategies as st

from babyverma import LeviDatum, RootDatum, build_verma, make_structural_map
from babyverma.lattice import Box, fundamental_box
from babyverma.linkage import (alpha_up, alpha_up_n, compute_r_pi, irreducibility_prediction, linkage_graph,
                               n_beta, predicted_blocks, regime, related_by_root_reflections, related_by_w_I_pi,
                               verify_linkage)
from babyverma.verma import is_simple, iso_test


def test_r_pi_examples():
    d = RootDatum("A2", 3)
    assert set(compute_r_pi(make_structural_map(d, "zero")).r_pi) == set(d.roots)
    assert compute_r_pi(make_structural_map(RootDatum("A1", 5), "generic")).r_pi == ()
    prof = compute_r_pi(make_structural_map(d, "0,s"))
    assert set(prof.r_pi) == {(1, 0), (-1, 0)} and prof.r_pi_plus == ((1, 0),)


def test_n_beta_examples():
    d = RootDatum("A1", 5)
    a = d.simple_roots[0]
    zero = make_structural_map(d, "zero")
    assert n_beta(zero, (-1,), a) == 0
    # <2 + 1, a^vee> = 3
    assert n_beta(zero, (2,), a) == 3
    # pi(h) = 2: 2 + 2 = 4
    assert n_beta(make_structural_map(d, "2"), (1,), a) == 4
    with pytest.raises(ValueError):
        n_beta(make_structural_map(d, "generic"), (0,), a)


def test_alpha_up_examples():
    d = RootDatum("A1", 5)
    a = d.simple_roots[0]
    # <1 + 1, a^vee> = 2 = 5 - 3, so up = 1 + 3 * 2
    assert alpha_up(d, (1,), a) == (7,)
    assert alpha_up(RootDatum("A1", 3), (1,), a) == (3,)
    assert alpha_up_n(d, (-1,), a) == 0 and alpha_up(d, (-1,), a) == (-1,)
    d2 = RootDatum("A2", 3)
    for lam in fundamental_box(d2):
        for r in d2.positive_roots:
            # up is an affine reflection of lam, so <up + rho, r^vee> = -<lam + rho, r^vee> mod p
            x = d2.pairing(tuple(a + b for a, b in zip(lam, d2.rho)), r)
            up = alpha_up(d2, lam, r)
            assert d2.pairing(tuple(a + b for a, b in zip(up, d2.rho)), r) % 3 == -x % 3


def test_regime_flags():
    d = RootDatum("A2", 3)
    zero = make_structural_map(d, "zero")
    r = regime(LeviDatum(d, (0,)), zero)
    assert r["iso"] and r["block"] and r["single_root_in_I"]
    assert regime(LeviDatum(d, (0, 1)), zero)["iso"]
    assert not regime(LeviDatum(d, ()), zero)["single_root_in_I"]


def test_predicted_blocks_generic_are_singletons():
    d = RootDatum("A2", 3)
    pi = make_structural_map(d, "generic")
    classes = predicted_blocks(pi, LeviDatum(d, ()), fundamental_box(d))
    assert all(len(c) == 1 for c in classes) and len(classes) == 9


def test_predicted_blocks_A1_pattern():
    d = RootDatum("A1", 3)
    pi = make_structural_map(d, "zero")
    classes = predicted_blocks(pi, LeviDatum(d, ()), fundamental_box(d))
    # orbit of lam is (lam + 6Z) u (-lam - 2 + 6Z): nothing links inside [-1, 1]
    assert sorted(classes) == [[(-1,)], [(0,)], [(1,)]]
    big = predicted_blocks(pi, LeviDatum(d, ()), Box(((-3, 5),)))
    assert sorted(big) == [[(-3,), (1,), (3,)], [(-2,), (0,), (4,)], [(-1,), (5,)], [(2,)]]
    # with I = all, pZI = 6Z is already inside the orbit
    full = predicted_blocks(pi, LeviDatum(d, (0,)), fundamental_box(d))
    assert sorted(full) == [[(-1,)], [(0,)], [(1,)]]


def test_prediction_uses_translations_outside_the_box():
    # (1, 0) = s_a1 . (-1, 0) + 3 a1 for B2 with I = all; a1 = (2, -2) does not fit in the box
    d = RootDatum("B2", 3)
    lv = LeviDatum(d, (0, 1))
    pi = make_structural_map(d, "zero")
    assert related_by_w_I_pi(lv, pi, (1, 0), (-1, 0))
    classes = predicted_blocks(pi, lv, fundamental_box(d))
    assert [(-1, 0), (1, 0)] in classes


@pytest.mark.parametrize("t,p,I", [("A1", 3, ()), ("A1", 5, ()), ("A1", 3, (0,)), ("A2", 3, ()),
                                   ("A2", 3, (0,))])
def test_verify_linkage_passes(t, p, I):
    d = RootDatum(t, p)
    res = verify_linkage(make_structural_map(d, "zero"), LeviDatum(d, I), fundamental_box(d))
    assert res["ok"], res["violations"]


def test_generic_linkage_graph_has_no_edges():
    d = RootDatum("A2", 3)
    g, factors = linkage_graph(make_structural_map(d, "generic"), LeviDatum(d, ()), fundamental_box(d))
    assert g.number_of_edges() == 0
    assert all(sum(cf.values()) == 1 for cf in factors.values())


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([("A1", 3), ("A1", 5), ("A2", 3)]), st.sampled_from(["zero", "generic"]), st.data())
def test_irreducibility_prediction_matches(tp, preset, data):
    d = RootDatum(*tp)
    I = data.draw(st.sampled_from([(), (0,)]))
    lv = LeviDatum(d, I)
    pi = make_structural_map(d, preset)
    lam = data.draw(st.sampled_from(list(fundamental_box(d))))
    assert irreducibility_prediction(pi, lv, lam) == is_simple(build_verma(lv, pi, lam))


def test_single_non_simple_root_links_through_its_reflection():
    # R_pi ∩ R_I = {a1 + 2a2}: no simple reflection lies in R_pi, yet s_b identifies the two modules
    d = RootDatum("B2", 3)
    lv = LeviDatum(d, (0, 1))
    pi = make_structural_map(d, "s,-s")
    assert len(compute_r_pi(pi).r_pi_plus) == 1 and not regime(lv, pi)["single_root_in_I"]
    lam, mu = (1, -1), (1, 1)
    assert iso_test(build_verma(lv, pi, lam), build_verma(lv, pi, mu))
    assert not related_by_w_I_pi(lv, pi, lam, mu)
    assert related_by_root_reflections(lv, pi, lam, mu)
