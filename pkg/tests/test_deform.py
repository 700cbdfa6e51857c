import pytest
from hypothesis import given, settings, strategies as st

from babyverma import LeviDatum, RootDatum, build_verma, make_structural_map
from babyverma.deform import (Rejected, admissible, baer_check, base_change, build_deformed_verma, build_Y,
                              deformation_ring, direct_sum, equivalent, ext_group_rank1, projective_Q,
                              literal_span, q_residue_checks, reciprocity_check, split_test)
from babyverma.lattice import fundamental_box
from babyverma.uchi import check_module_axioms
from babyverma.verma import is_simple


def a1(p=3, I=()):
    return LeviDatum(RootDatum("A1", p), I)


def test_deformed_verma_is_free_and_reduces_to_the_field_module():
    lv = a1(5)
    M = build_deformed_verma(lv, (2,))
    assert M.rank == 5
    Mk = base_change(M)
    Z = build_verma(lv, make_structural_map(lv.datum, "zero"), (2,))
    assert Mk.dumps() == Z.dumps()


def test_generic_fibre_is_simple():
    lv = a1(3)
    for lam in fundamental_box(lv.datum):
        assert is_simple(base_change(build_deformed_verma(lv, lam), "generic"))


def test_build_Y_cases():
    lv = a1(3)
    R = deformation_ring(3)
    K = R.K
    lam = (1,)
    for b in (K.zero, K.one, R.t):
        ext = build_Y(lv, lam, b)
        assert ext.checks["exact"] and ext.checks["axioms"]
        assert split_test(ext)
    ext = build_Y(lv, lam, R.t_power(-1))
    assert ext.checks["exact"] and not split_test(ext)
    with pytest.raises(Rejected):
        build_Y(lv, lam, R.t_power(-2))
    with pytest.raises(ValueError):
        build_Y(lv, (-1,), K.one)            # alpha-up fixes -1


def test_admissibility_is_the_valuation_bound():
    R = deformation_ring(5)
    assert admissible(R, R.t_power(-1)) and admissible(R, R.K.zero)
    assert not admissible(R, R.t_power(-2))


@settings(max_examples=12, deadline=None)
@given(st.integers(-3, 2), st.integers(1, 2))
def test_Y_exists_iff_admissible(k, c):
    lv = a1(3)
    R = deformation_ring(3)
    K = R.K
    b = K.mul(K.from_int(c), R.t_power(k))
    try:
        ext = build_Y(lv, (1,), b)
    except Rejected:
        assert not admissible(R, b)
        return
    assert admissible(R, b) and ext.checks["exact"]
    assert split_test(ext) == (k >= 0)


def test_extension_group_has_order_p():
    for p in (3, 5):
        res = ext_group_rank1(a1(p), (1,))
        assert res["ok"], res
        assert res["order"] == p and res["zero_class_split"] and not res["generator_split"]


def test_equivalence_modulo_A():
    lv = a1(5)
    R = deformation_ring(5)
    K = R.K
    tinv = R.t_power(-1)
    e1 = build_Y(lv, (1,), tinv)
    e2 = build_Y(lv, (1,), K.add(tinv, K.from_int(3)))
    e3 = build_Y(lv, (1,), K.mul(K.from_int(2), tinv))
    assert equivalent(e1, e2) and not equivalent(e1, e3)


def test_baer_sum_of_generator_with_itself():
    R = deformation_ring(3)
    res = baer_check(a1(3), (1,), R.t_power(-1), R.t_power(-1))
    assert res == {"matrix_equal": True, "axioms": True}


def test_projective_Q_shapes():
    lv = a1(3)
    Q = projective_Q(lv, (1,))
    assert Q.rank == 6 and Q.layers == [(3,), (1,)]
    assert check_module_axioms(base_change(Q)) == []
    Z = projective_Q(lv, (-1,))
    assert Z.rank == 3 and Z.layers == [(-1,)]


@pytest.mark.parametrize("p,I", [(3, ()), (3, (0,)), (5, ())])
def test_q_residue_checks(p, I):
    lv = a1(p, I)
    for lam in fundamental_box(lv.datum):
        res = q_residue_checks(lv, lam)
        assert res["ok"], res


def test_reciprocity_on_the_fundamental_box():
    for I in [(), (0,)]:
        lv = a1(3, I)
        assert reciprocity_check(lv, fundamental_box(lv.datum))["ok"]


def test_span_generated_by_v0_is_not_an_extension():
    R = deformation_ring(3)
    # n = 1 at lam = 1: Z_A(1) plus t^-1 U^- f v1, which misses f^(2) v1
    res = literal_span(a1(3), (1,), R.t_power(-1))
    assert res["rank"] == 5 and not res["e_stable"]
    assert literal_span(a1(3), (1,), R.K.zero)["rank"] == 3


def test_direct_sum_with_itself():
    lv = a1(3)
    Z = build_verma(lv, make_structural_map(lv.datum, "zero"), (1,))
    D = direct_sum(Z, Z)
    assert D.dim == 2 * Z.dim and check_module_axioms(D) == []


def test_rank_two_is_rejected():
    with pytest.raises(ValueError):
        build_deformed_verma(LeviDatum(RootDatum("A2", 3), ()), (0, 0))
