from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from sl2ulrich.exactalg import SparseMatrix
from sl2ulrich.psheaf import Poly, monomials
from sl2ulrich.sl2 import (RepDecomposition, block_action, clebsch_gordan, derivation,
                           equivariance_defect, equivariant_maps, exterior_power_decomposition,
                           generator_action, monomial_weight, sym_power_decomposition,
                           tensor_labels)

weights = st.integers(min_value=0, max_value=12)


def commutator(A, B):
    AB, BA = A @ B, B @ A
    return {k: AB.data.get(k, 0) - BA.data.get(k, 0) for k in set(AB.data) | set(BA.data)}


def as_dict(M: SparseMatrix, scale=1):
    return {k: v * scale for k, v in M.data.items()}


def nonzero(d):
    return {k: v for k, v in d.items() if v}


@pytest.mark.parametrize("p", range(7))
def test_sl2_relations(p):
    g = generator_action(p)
    assert nonzero(commutator(g.e, g.f)) == nonzero(as_dict(g.h))
    assert nonzero(commutator(g.h, g.e)) == nonzero(as_dict(g.e, 2))
    assert nonzero(commutator(g.h, g.f)) == nonzero(as_dict(g.f, -2))


def test_derivation_is_lie_action():
    for g in [Poly({m: i + 1 for i, m in enumerate(monomials(3))})]:
        ef = derivation("e", derivation("f", g)) - derivation("f", derivation("e", g))
        assert ef == derivation("h", g)


def test_coordinate_weights():
    for i in range(4):
        x = Poly.var(i)
        assert derivation("h", x) == x * (2 * i - 3)
    m = (1, 0, 2, 1)
    assert derivation("h", Poly({m: 1})) == Poly({m: monomial_weight(m)})


@given(weights, weights)
def test_clebsch_gordan_dimension(a, b):
    cg = clebsch_gordan(a, b)
    assert cg.dim == (a + 1) * (b + 1)
    assert len(cg) == min(a, b) + 1
    assert clebsch_gordan(b, a) == cg


@given(st.integers(0, 8))
def test_sym2_plus_wedge2(p):
    V = RepDecomposition.irrep(p)
    assert sym_power_decomposition(p, 2) + exterior_power_decomposition(p, 2) == tensor_labels(V, V)


@given(st.integers(0, 6), st.integers(0, 4))
@settings(deadline=None)
def test_hermite_reciprocity(p, k):
    assert sym_power_decomposition(p, k) == sym_power_decomposition(k, p)


def test_known_symmetric_powers():
    assert sym_power_decomposition(4, 2).weights == (8, 4, 0)
    assert sym_power_decomposition(3, 4).weights == (12, 8, 6, 4, 0)
    assert sym_power_decomposition(3, 2).weights == (6, 2)


@pytest.mark.parametrize("a,b", [(0, 0), (2, 2), (3, 1), (1, 4)])
def test_schur_lemma_constant_maps(a, b):
    maps = equivariant_maps(RepDecomposition.irrep(a), RepDecomposition.irrep(b), 0)
    assert len(maps) == (1 if a == b else 0)


@pytest.mark.parametrize("a,b,deg", [(3, 4, 1), (0, 3, 1), (2, 5, 1), (0, 6, 2), (1, 1, 2)])
def test_equivariant_map_counts(a, b, deg):
    # Hom(V_a, V_b ⊗ Sym^deg V_3) multiplicity
    sym = sym_power_decomposition(3, deg)
    expected = tensor_labels(RepDecomposition.irrep(b), sym).multiplicity(a)
    maps = equivariant_maps(RepDecomposition.irrep(a), RepDecomposition.irrep(b), deg)
    assert len(maps) == expected
    for A in maps:
        assert all(equivariance_defect(A, RepDecomposition.irrep(a), RepDecomposition.irrep(b)).values())


def test_defect_detects_non_equivariant():
    [A] = equivariant_maps(RepDecomposition.irrep(3), RepDecomposition.irrep(4), 1)
    key = next(iter(A.entries))
    B = type(A)(A.source, A.target, {**A.entries, key: A.entries[key] + Poly.var(0)})
    assert not all(equivariance_defect(B, RepDecomposition.irrep(3), RepDecomposition.irrep(4)).values())


def test_block_action_and_weights():
    rep = RepDecomposition((1, 2))
    assert rep.weights == (2, 1)
    assert rep.basis_weights() == (2, 0, -2, 1, -1)
    assert block_action(rep, "h").data[(3, 3)] == 1
    with pytest.raises(ValueError):
        RepDecomposition((-1,))
    assert Counter(rep.multiplicities()) == Counter({2: 1, 1: 1})
