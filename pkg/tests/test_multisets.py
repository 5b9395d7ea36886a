from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from msip.exact import mat_vec, solve_square
from msip.graver import BudgetExceeded
from msip.multisets import (Multiset, almost_partition, bound_constants, find_small_valid_submultisets, lcm_upto,
                            point_set, rho_valid, single_element, valid_witness_from_kernel)
from msip.structure import Block, tree_from_nested, validate_structure

from families import cone_fixtures, valid_families

M = Multiset.from_items
TWO_LEAF = tree_from_nested({"cols": [0], "children": [{"cols": [1]}, {"cols": [2]}]})
TWO_STAGE = validate_structure([[1, 1, 0], [1, 0, 1]], [Block((0, 1), (0,)), Block((0,), (1,)), Block((1,), (2,))])


def test_multiset_basics():
    T = M([(1, 0), (1, 0), (0, 1)])
    assert T[(1, 0)] == 2 and T[(5, 5)] == 0
    assert T.cardinality() == 3
    assert T.total() == [2, 1]
    assert M([(1, 0)]) <= T and not T <= M([(1, 0)])
    assert (T - M([(1, 0)])) + M([(1, 0)]) == T
    assert Multiset({(1,): Fraction(1, 2)}).is_integral() is False
    with pytest.raises(ValueError):
        Multiset({(1,): -1})


def test_point_set_size():
    assert len(point_set(2, 1)) == 9
    assert len(point_set(3, 2)) == 125


def test_rho_valid_examples():
    b = [1, 7, 9]
    assert rho_valid(TWO_LEAF, b, 1, [M([(1, 7)]), M([(1, 9)])])
    assert not rho_valid(TWO_LEAF, b, 1, [M([(2, 7)]), M([(1, 9)])])
    assert rho_valid(TWO_LEAF, b, Fraction(3, 2), [M([(2, 7)]), M([(1, 9)])])
    assert rho_valid(TWO_LEAF, [0, 0, 0], Fraction(1, 100), [Multiset({}, 2), Multiset({}, 2)])


def test_rho_valid_dimension_mismatch():
    with pytest.raises(ValueError):
        rho_valid(TWO_LEAF, [0, 0, 0], 1, [M([(1, 2, 3)]), Multiset({}, 2)])


def test_witness_examples():
    assert valid_witness_from_kernel(TWO_STAGE, [1, -1, -1]) == [M([(1, -1)]), M([(1, -1)])]
    assert valid_witness_from_kernel(TWO_STAGE, [2, -2, -2]) == [M([(1, -1)] * 2), M([(1, -1)] * 2)]
    assert all(len(G) == 0 for G in valid_witness_from_kernel(TWO_STAGE, [0, 0, 0]))
    with pytest.raises(ValueError):
        valid_witness_from_kernel(TWO_STAGE, [1, 0, 0])


def test_small_submultiset_examples():
    w = find_small_valid_submultisets(TWO_LEAF, [M([(1, 0), (1, 1)]), M([(2, 5)])], 3)
    assert w.S == (M([(1, 0), (1, 1)]), M([(2, 5)])) and w.bhat == (2, 1, 5)
    w = find_small_valid_submultisets(TWO_LEAF, [M([(1, 3)]), M([(1, 4)])], 3)
    assert w.S == (M([(1, 3)]), M([(1, 4)])) and w.bhat == (1, 3, 4)
    w = find_small_valid_submultisets(TWO_LEAF, [M([(0, 2)]), Multiset({}, 2)], 3)
    assert w.S == (M([(0, 2)]), Multiset({}, 2)) and w.bhat == (0, 2, 0)


def test_small_submultiset_none_and_errors():
    assert find_small_valid_submultisets(TWO_LEAF, [M([(1, 0)]), M([(2, 0)])], 1) is None
    with pytest.raises(ValueError):
        find_small_valid_submultisets(TWO_LEAF, [M([(1, 1), (-1, 1)]), M([(1, 0)])], 2)
    with pytest.raises(BudgetExceeded):
        find_small_valid_submultisets(TWO_LEAF, [M([(1, 0)] * 3), M([(1, 0)] * 3)], 3, budget=2)


def test_single_element_examples():
    r = single_element([Multiset({(1,): 5}), Multiset({(1,): 5})], [5], 1)
    assert r.bhat == (1,) and r.bases == (((1,),), ((1,),)) and r.x == ((1,), (1,))
    r = single_element([Multiset({(1, 0): 3, (0, 1): 3}), Multiset({(1, 1): 3})], [3, 3], 1)
    assert r.bhat == (1, 1)
    assert set(r.bases[0]) == {(1, 0), (0, 1)} and r.x[0] == (1, 1)
    assert r.usage(1)[(1, 1)] == 1
    assert single_element([Multiset({(1, 0): 1}), Multiset({(0, 1): 1})], [Fraction(1, 2), Fraction(1, 2)], 1) is None


def test_single_element_precondition():
    with pytest.raises(ValueError):
        single_element([Multiset({(1,): 5})], [2], 1)


def test_almost_partition_examples():
    ap = almost_partition([Multiset({(1,): 5}), Multiset({(1,): 5})], [5], 1)
    assert len(ap.steps) == 5 and ap.residual == (0,)
    assert ap.aggregate(0, 1) == ap.aggregate(1, 1) == Multiset({(1,): 5})
    ap = almost_partition([Multiset({(1, 0): 1}), Multiset({(0, 1): 1})], [Fraction(1, 2), Fraction(1, 2)], 1)
    assert ap.family == {} and ap.residual == (Fraction(1, 2), Fraction(1, 2))
    ap = almost_partition([Multiset({(1, 0): 2})], [2, 0], 1)
    assert ap.aggregate(0, 2) == Multiset({(1, 0): 2}) and ap.residual == (0, 0)


def test_bound_table_examples():
    T = bound_constants(2, 1, 1)
    assert T.Delta == (2, 256)
    assert T.nu == 720720 and T.alpha[1] == 720720
    assert T.beta[1] == 2 ** 64
    T0 = bound_constants(3, 2, 0)
    assert T0.Delta == (6,) and T0.nu == 1 and T0.alpha == (1,) and T0.beta == (1,)
    assert lcm_upto(4) == 12


def test_bound_table_lcm_cap():
    with pytest.raises(BudgetExceeded):
        bound_constants(2, 2, 2)


@pytest.mark.parametrize("d, delta, t", [(1, 2, 1), (2, 1, 1), (1, 3, 2), (2, 2, 1), (1, 2, 3)])
def test_bound_table_invariants(d, delta, t):
    T = bound_constants(d, delta, t)
    assert T.Delta[0] == d * delta
    assert all(T.nu % k == 0 for k in range(1, T.lcm_cap + 1))
    if d >= 2:
        assert all(a < b for a, b in zip(T.Delta, T.Delta[1:]))
    else:
        # d = 1 makes every exponent d^(3i) equal to 1
        assert set(T.Delta) == {delta}


FAMILIES = valid_families(30, seed=7)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(1, 3))
def test_rho_valid_monotone(fam, bump):
    tree, T, b, rho = fam
    assert rho_valid(tree, b, rho, T)
    assert rho_valid(tree, b, rho + Fraction(bump, 3), T)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(1, 4))
def test_submultiset_witness_sound(fam, max_card):
    tree, T, _, _ = fam
    delta = max([1] + [max(map(abs, p)) for Ti in T for p in Ti.support()])
    w = find_small_valid_submultisets(tree, T, max_card, delta=delta)
    if w is None:
        return
    assert any(len(S) for S in w.S)
    assert all(S <= Ti and S.cardinality() <= max_card for S, Ti in zip(w.S, T))
    assert rho_valid(tree, w.bhat, 1, list(w.S))


CONES = [f for f in cone_fixtures(80, seed=3) if single_element(*f) is not None]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(CONES))
def test_single_element_contract(fix):
    lambdas, b, rho = fix
    r = single_element(lambdas, b, rho)
    d = len(b)
    assert any(r.bhat) and max(map(abs, r.bhat)) <= d ** (d * d)
    for i, lam in enumerate(lambdas):
        assert mat_vec(r.matrix(i), r.x[i]) == list(r.bhat)
        assert all(0 <= x <= lam[p] for p, x in zip(r.bases[i], r.x[i]))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(CONES))
def test_almost_partition_identities(fix):
    lambdas, b, rho = fix
    d = len(b)
    ap = almost_partition(lambdas, b, rho)
    aggs = [ap.aggregate(i, d) for i in range(len(lambdas))]
    assert all(a == aggs[0] for a in aggs)
    extracted = aggs[0].total(d)
    assert [e + r for e, r in zip(extracted, ap.residual)] == list(b)
    for i, lam in enumerate(lambdas):
        used = Multiset({}, d)
        for (basis, k), ms in ap.family.items():
            if k != i:
                continue
            B = [list(row) for row in zip(*basis)]
            for p, mult in ms.items():
                x = solve_square(B, p)
                assert all(v >= 0 for v in x)
                used = used + Multiset({col: mult * v for col, v in zip(basis, x) if v}, d)
        assert used <= lam
