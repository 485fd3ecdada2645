from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sl2ulrich.exactalg import (BadPrimeError, MatrixTooLargeError, PrimeSource, RankMismatchError,
                                RankPolicy, SparseMatrix, certified_rank, certified_rank_rows,
                                default_primes, integer_rows, kernel_basis, rank, rank_int_rows,
                                rank_mod_rows, reduce_rows_mod, rref)

small_ints = st.integers(min_value=-4, max_value=4)


@st.composite
def matrices(draw, max_dim=6):
    r = draw(st.integers(0, max_dim))
    c = draw(st.integers(0, max_dim))
    rows = [[draw(small_ints) for _ in range(c)] for _ in range(r)]
    return SparseMatrix.from_dense(rows) if r and c else SparseMatrix.zeros(r, c)


def test_basic_ranks():
    assert rank(SparseMatrix.identity(5)).value == 5
    assert rank(SparseMatrix.zeros(3, 4)).value == 0
    M = SparseMatrix.from_dense([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    assert rank(M).value == 2
    assert rank(M, mode="modular").value == 2


def test_rank_over_q_not_z():
    # rank 1 mod 2 but 2 over Q
    M = SparseMatrix.from_dense([[1, 1], [1, -1]])
    assert rank(M).value == 2
    assert rank_mod_rows(integer_rows(M.rows()), 2) == 1


def test_fractions_are_cleared():
    M = SparseMatrix.from_dense([[Fraction(1, 2), Fraction(1, 3)], [3, 2]])
    assert rank(M).value == 1
    assert integer_rows(M.rows())[0] == {0: 3, 1: 2}


def test_bad_prime_detected():
    with pytest.raises(BadPrimeError):
        reduce_rows_mod([{0: Fraction(1, 7)}], 7)


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_rank_of_transpose(M):
    assert rank(M).value == rank(M.T).value


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_rank_nullity_and_kernel(M):
    K = kernel_basis(M)
    assert rank(M).value + len(K) == M.ncols
    for v in K:
        assert all(x == 0 for x in M.apply(v))
        assert next(x for x in v if x) == 1


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_modular_agrees_with_exact(M):
    assert rank(M, mode="modular").value == rank(M).value
    assert certified_rank(M) == rank(M).value


@given(matrices(), matrices())
@settings(max_examples=40, deadline=None)
def test_product_rank_bound(A, B):
    if A.ncols != B.nrows:
        return
    assert rank(A @ B).value <= min(rank(A).value, rank(B).value)


def test_rref_pivots():
    rows, pivots = rref(SparseMatrix.from_dense([[0, 2, 4], [1, 1, 1]]))
    assert pivots == [0, 1]
    assert rows[1] == {1: 1, 2: 2}


def test_primes_are_seeded_and_distinct():
    a, b = default_primes(5)
    assert a != b and a > 2 ** 61
    assert default_primes(5) == (a, b)
    assert PrimeSource(5).pair() == (a, b)
    assert default_primes(6) != (a, b)


def test_policy_exact_refuses_large():
    pol = RankPolicy(mode="exact", exact_threshold=3)
    with pytest.raises(MatrixTooLargeError, match="nonzero entries"):
        certified_rank_rows([{0: 1, 1: 1}, {1: 1, 2: 1}], pol)


def test_policy_auto_runs_both():
    pol = RankPolicy()
    assert certified_rank_rows([{0: 1}, {0: 2}], pol) == 1
    assert pol.stats["exact"] == 1 and pol.stats["modular"] == 1


def test_policy_detects_disagreement():
    # 3 divides every minor of full size: rank mod 3 drops
    pol = RankPolicy(mode="modular", primes=(3, 5))
    with pytest.raises(RankMismatchError):
        certified_rank_rows([{0: 3}], pol)


def test_int_rank_large_entries():
    big = 2 ** 80
    assert rank_int_rows([{0: big, 1: big + 1}, {0: big - 1, 1: big}]) == 2
