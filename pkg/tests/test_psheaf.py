from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from sl2ulrich.psheaf import (FreeComplex, FreeSheaf, Poly, PolyMatrix, binom_poly, chi_line,
                              euler_characteristic, graded_dim, line_cohomology, monomials,
                              single_term, tensor_complexes, verify_complex)

twists = st.integers(min_value=-40, max_value=40)


@given(twists)
def test_line_serre_duality(t):
    for i in range(4):
        assert line_cohomology(i, t) == line_cohomology(3 - i, -4 - t)


@given(twists)
def test_line_euler_characteristic(t):
    h = [line_cohomology(i, t) for i in range(4)]
    assert h[0] - h[1] + h[2] - h[3] == chi_line(t) == binom_poly(t + 3)
    assert h[1] == h[2] == 0


def test_line_values():
    assert [line_cohomology(0, t) for t in range(4)] == [1, 4, 10, 20]
    assert line_cohomology(3, -4) == 1 and line_cohomology(3, -5) == 4
    assert all(line_cohomology(i, t) == 0 for i in range(4) for t in (-1, -2, -3))
    assert chi_line(-2) == 0 and chi_line(-6) == -10


def test_monomial_counts():
    for d in range(6):
        assert len(monomials(d)) == comb(d + 3, 3)
    assert monomials(-1) == ()


def test_poly_arithmetic():
    x = [Poly.var(i) for i in range(4)]
    p = x[0] * x[1] + x[2] * x[2]
    assert p.degree == 2
    assert (p - p).is_zero()
    assert p.evaluate((1, 2, 3, 4)) == 11
    assert p.diff(2) == x[2] * 2
    with pytest.raises(ValueError):
        x[0] + x[0] * x[1]


def test_polymatrix_degree_check():
    src, tgt = FreeSheaf((-1,)), FreeSheaf((0,))
    PolyMatrix(src, tgt, {(0, 0): Poly.var(0)})
    with pytest.raises(ValueError):
        PolyMatrix(src, FreeSheaf((1,)), {(0, 0): Poly.var(0)})


def koszul_tail():
    # O(-2) -> O(-1)^2 -> O, Koszul complex on x0, x1
    x = [Poly.var(i) for i in range(4)]
    a = PolyMatrix(FreeSheaf((-2,)), FreeSheaf((-1, -1)), {(0, 0): -x[1], (1, 0): x[0]})
    b = PolyMatrix(FreeSheaf((-1, -1)), FreeSheaf((0,)), {(0, 0): x[0], (0, 1): x[1]})
    return FreeComplex((a.source, b.source, b.target), (a, b), -2, "K")


def test_complex_checks():
    K = koszul_tail()
    assert verify_complex(K) == (True, None)
    assert euler_characteristic(K, 3) == chi_line(1) - 2 * chi_line(2) + chi_line(3)
    assert graded_dim(K.term(-1), 2) == 2 * comb(4, 3)


def test_tensor_of_complexes():
    K = koszul_tail()
    T = tensor_complexes(K, K)
    assert T.start == -4 and T.length == 5
    assert verify_complex(T)[0]
    for t in range(-6, 6):
        assert euler_characteristic(T, t) == sum(
            euler_characteristic(single_term(FreeSheaf((a + b,))), t)
            * (-1) ** (p + q)
            for p in K.positions for a in K.term(p).twists
            for q in K.positions for b in K.term(q).twists)


def test_non_complex_detected():
    K = koszul_tail()
    x = Poly.var(2)
    bad = PolyMatrix(K.maps[1].source, K.maps[1].target, {(0, 0): K.maps[1][0, 0] + x,
                                                         (0, 1): K.maps[1][0, 1]})
    assert verify_complex(FreeComplex(K.terms, (K.maps[0], bad), -2)) == (False, -2)
