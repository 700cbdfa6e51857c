import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from babyverma import scalars as S
from babyverma.scalars import DVR, PrimeField, RationalFunctionField


def F7():
    return PrimeField(7)


def test_rref_identity_and_zero():
    F = PrimeField(5)
    R, piv = S.rref(F, S.identity(F, 3))
    assert len(R) == 3 and piv == [0, 1, 2]
    assert S.rank(F, S.zeros(F, 3, 4)) == 0


def test_rref_proportional_rows_over_rational_functions():
    K = RationalFunctionField(3, "s")
    s = K.gen()
    M = [[K.one, s], [s, K.mul(s, s)]]
    assert S.rank(K, M) == 1


def test_solve_identity_and_inconsistent():
    F = F7()
    b = [3, 1, 4]
    assert S.solve(F, S.identity(F, 3), b) == b
    assert S.solve(F, S.zeros(F, 2, 2), [1, 0]) is None


def test_kernel_recovers_planted_vector():
    F = F7()
    rng = random.Random(1)
    v = [1, 2, 3, 4]
    rows = []
    while len(rows) < 4:
        r = [rng.randrange(7) for _ in range(3)]
        # last coordinate forces r . v = 0
        r.append((-(r[0] * 1 + r[1] * 2 + r[2] * 3) * pow(4, -1, 7)) % 7)
        rows.append(r)
    ker = S.kernel(F, rows, 4)
    assert ker
    R, piv = S.rref(F, ker)
    assert S.in_span(F, R, piv, v)


def test_largest_invariant_trivial_cases():
    F = PrimeField(3)
    W = [[1, 0, 0], [0, 1, 1]]
    K = S.largest_invariant_subspace(F, W, [])
    assert S.rank(F, K) == 2
    amb = S.identity(F, 3)
    J = [[0, 1, 0], [0, 0, 1], [0, 0, 0]]
    assert S.rank(F, S.largest_invariant_subspace(F, amb, [J])) == 3


def test_largest_invariant_jordan_block_matches_enumeration():
    F = PrimeField(3)
    J = [[0, 1, 0], [0, 0, 1], [0, 0, 0]]
    W = [[1, 0, 0], [0, 1, 0]]
    K = S.largest_invariant_subspace(F, W, [J])
    want = oracles.largest_invariant_bruteforce(3, W, [J], 3)
    assert oracles.span(3, K, 3) == want
    assert len(want) == 9


small_matrix = st.integers(2, 4).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.lists(st.integers(0, 2), min_size=n, max_size=n), min_size=1, max_size=n),
        st.lists(st.lists(st.lists(st.integers(0, 2), min_size=n, max_size=n), min_size=n, max_size=n),
                 min_size=1, max_size=2),
    ))


@settings(max_examples=40, deadline=None)
@given(small_matrix)
def test_largest_invariant_property_vs_bruteforce(data):
    n, W, gens = data
    F = PrimeField(3)
    K = S.largest_invariant_subspace(F, W, gens)
    got = oracles.span(3, K, n) if K else frozenset([tuple([0] * n)])
    assert got == oracles.largest_invariant_bruteforce(3, W, gens, n)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(0, 6), min_size=4, max_size=4), min_size=1, max_size=5))
def test_rank_nullity(rows):
    F = F7()
    assert S.rank(F, rows) + len(S.kernel(F, rows, 4)) == 4
    for v in S.kernel(F, rows, 4):
        assert all(x == 0 for x in S.mat_vec(F, rows, v))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(0, 4), min_size=3, max_size=3), min_size=3, max_size=3),
       st.lists(st.integers(0, 4), min_size=3, max_size=3))
def test_solve_is_a_solution(M, b):
    F = PrimeField(5)
    x = S.solve(F, M, b)
    if x is None:
        # inconsistent: b outside the column space
        cols = S.transpose(M)
        R, piv = S.rref(F, cols)
        assert not S.in_span(F, R, piv, b)
    else:
        assert S.mat_vec(F, M, x) == [v % 5 for v in b]


# ---------------------------------------------------------------------------
# local ring

def test_dvr_solve_examples():
    R = DVR(3)
    K = R.K
    t = R.t
    sol = S.dvr_solve(R, [[K.one, K.zero], [K.zero, K.one]], [t, K.one])
    assert sol.ok and sol.x == [t, K.one]
    assert not S.dvr_solve(R, [[t]], [K.one]).ok
    sol = S.dvr_solve(R, [[t]], [K.mul(t, t)])
    assert sol.ok and sol.x == [t]


def test_dvr_smith_factorisation():
    R = DVR(5)
    K = R.K
    t = R.t
    M = [[t, K.one], [K.mul(t, t), t]]
    U, D, V, r = S.dvr_smith(R, M)
    assert S.mat_mul(K, S.mat_mul(K, U, M), V) == D
    vals = [R.valuation(D[i][i]) for i in range(r)]
    assert vals == sorted(vals)


def test_dvr_membership_and_residue():
    R = DVR(3)
    K = R.K
    x = K.make((1, 1), (1, 2))          # (1+t)/(1+2t)
    assert R.contains(x) and R.is_unit(x) and R.residue(x) == 1
    assert not R.contains(R.t_power(-1))
    with pytest.raises(ValueError):
        R.element((1,), (0, 1))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=4), st.integers(-3, 3))
def test_valuation_of_t_power_multiple(coeffs, k):
    R = DVR(3)
    K = R.K
    f = K.make(tuple(coeffs))
    if K.is_zero(f):
        return
    g = K.mul(f, R.t_power(k))
    assert R.valuation(g) == R.valuation(f) + k


def test_lattice_basis_and_membership():
    R = DVR(3)
    K = R.K
    t = R.t
    B = S.lattice_basis(R, [[t, K.zero], [K.zero, K.one], [t, K.one]])
    assert len(B) == 2
    assert S.lattice_contains(R, B, [t, K.one])
    assert not S.lattice_contains(R, B, [K.one, K.zero])
