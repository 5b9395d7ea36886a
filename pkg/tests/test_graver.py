import pytest
from hypothesis import given, settings, strategies as st

from msip.graver import (BudgetExceeded, conformal_decompose, conformal_leq, graver_basis, graver_basis_enumerate,
                         graver_complexity, kernel_norm_bound)

from oracles import graver_box_oracle


def test_conformal_leq_examples():
    assert conformal_leq((1, -1), (2, -3))
    assert not conformal_leq((1, 1), (2, -3))
    for y in [(0, 0), (5, -2), (-1, 0)]:
        assert conformal_leq((0, 0), y)


@pytest.mark.parametrize("A, expected", [
    ([[1, 1]], {(1, -1), (-1, 1)}),
    ([[1, 2]], {(2, -1), (-2, 1)}),
    ([[1, 0], [0, 1]], set()),
    ([[1, 1, 1]], {(1, -1, 0), (-1, 1, 0), (1, 0, -1), (-1, 0, 1), (0, 1, -1), (0, -1, 1)}),
    ([[1, 1, 0], [1, 0, 1]], {(1, -1, -1), (-1, 1, 1)}),
])
def test_graver_examples(A, expected):
    assert set(graver_basis(A)) == expected


def test_graver_zero_matrix_needs_ncols():
    assert set(graver_basis([], ncols=2)) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    with pytest.raises(ValueError):
        graver_basis([])


def test_complexity_examples():
    G = graver_basis([[1, 2]])
    assert graver_complexity(G) == 2
    assert graver_complexity(G, 1) == 3
    assert G.norm_bound == kernel_norm_bound(2, 2) == 81
    assert graver_complexity(graver_basis([[1, 0], [0, 1]])) == 0
    assert graver_complexity(graver_basis([[1, 1, 0], [1, 0, 1]])) == 1


def test_decompose_examples():
    assert conformal_decompose(graver_basis([[1, 1]]), (3, -3)).counts() == {(1, -1): 3}
    assert conformal_decompose(graver_basis([[1, 1]]), (0, 0)).parts == ()
    assert conformal_decompose(graver_basis([[1, 2]]), (4, -2)).counts() == {(2, -1): 2}


def test_decompose_rejects_non_kernel():
    with pytest.raises(ValueError):
        conformal_decompose(graver_basis([[1, 1]]), (1, 1))


def test_enumeration_reference_agrees():
    A = [[1, -2, 1]]
    assert set(graver_basis(A)) == set(graver_basis_enumerate(A, bound=6))


def test_completion_budget():
    with pytest.raises(BudgetExceeded):
        graver_basis([[3, 5, 7, -11]], budget=3)


matrices = st.integers(1, 2).flatmap(lambda rows: st.integers(2, 4).flatmap(
    lambda m: st.lists(st.lists(st.integers(-2, 2), min_size=m, max_size=m), min_size=rows, max_size=rows)))


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_basis_invariants(A):
    G = graver_basis(A)
    elems = set(G)
    for g in elems:
        assert any(g)
        assert all(sum(a * x for a, x in zip(row, g)) == 0 for row in A)
        assert tuple(-x for x in g) in elems
        assert not any(h != g and conformal_leq(h, g) for h in elems)
        assert max(map(abs, g)) <= G.norm_bound


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-2, 2), min_size=4, max_size=4), min_size=2, max_size=2),
       st.lists(st.integers(-4, 4), min_size=2, max_size=2))
def test_decomposition_of_kernel_combinations(A, coeffs):
    from msip.exact import integer_kernel_basis
    K = integer_kernel_basis(A)
    y = [0] * 4
    for k, v in zip(coeffs, K):
        y = [a + k * b for a, b in zip(y, v)]
    dec = conformal_decompose(graver_basis(A), y)
    assert [sum(col) for col in zip(*dec.parts)] == y if dec.parts else not any(y)
    assert all(conformal_leq(g, y) for g in dec.parts)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.lists(st.integers(-1, 1), min_size=3, max_size=3), min_size=1, max_size=2))
def test_matches_box_oracle(A):
    G = graver_basis(A)
    assert set(G) == graver_box_oracle(A, 3, G.norm_bound)
