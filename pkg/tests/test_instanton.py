from math import comb

import pytest

from sl2ulrich.cech import CohomologyTable, hypercohomology
from sl2ulrich.exactalg import RankPolicy
from sl2ulrich.instanton import (EquivariantResolution, LongRunRequired, build_resolution, charge,
                                 chi_E, chi_EE, chi_F, e_complex, instanton_axioms,
                                 moduli_dimension_check, s2_from_ee, verify_coh0,
                                 verify_exactness, verify_lepotier)
from sl2ulrich.psheaf import Poly, PolyMatrix, euler_characteristic, line_cohomology


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_resolution(m):
    res = build_resolution(m)
    assert (res.psi_solutions, res.kappa_solutions) == (1, 1)
    assert set(res.point_ranks) == {3 * m} and len(res.point_ranks) == 20
    assert res.psi.shape == (3 * m + 2, 3 * m + 1)
    assert res.kappa.shape == (3 * m + 1, 1)
    cert = verify_exactness(res)
    assert cert.passed, cert.witness
    assert cert.data["degree_bound"] == 3 * m + 4


def test_resolution_is_deterministic():
    a = build_resolution.__wrapped__(2)
    b = build_resolution.__wrapped__(2)
    assert a.psi == b.psi and a.kappa == b.kappa


def test_m0_rejected():
    with pytest.raises(ValueError):
        build_resolution(0)


def perturbed(res: EquivariantResolution) -> EquivariantResolution:
    key = min(res.psi.entries)
    entries = dict(res.psi.entries)
    entries[key] = entries[key] + Poly.var(3)
    psi = PolyMatrix(res.psi.source, res.psi.target, entries)
    return EquivariantResolution(res.m, res.kappa, psi, 1, 1, res.point_ranks)


@pytest.mark.parametrize("m", [1, 2])
def test_perturbed_psi_is_rejected(m):
    cert = verify_exactness(perturbed(build_resolution(m)))
    assert not cert.passed
    assert "composition" in cert.witness


def c3(t):
    return (t + 3) * (t + 2) * (t + 1) // 6


@pytest.mark.parametrize("m", [1, 2, 3])
def test_chern_character(m):
    c = e_complex(m)
    k = charge(m)
    assert k == comb(m + 1, 2)
    for t in range(-10, 11):
        assert euler_characteristic(c, t) == chi_E(m, t) == 2 * c3(t) - k * (t + 2)
        assert chi_F(m, t) == 3 * c3(t) - 4 * k * (t + 2)
        assert chi_EE(m, t) == chi_F(m, t) + c3(t)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_instanton_axioms(m):
    cert = instanton_axioms(m)
    assert cert.passed, cert.witness


def test_e_tables_euler_and_duality(e_tables):
    for m, tab in e_tables.items():
        assert tab.check_euler(lambda t: chi_E(m, t)) == []
        # E is self-dual of rank 2 with c1 = 0: h^i(E(t)) = h^{3-i}(E(-4-t))
        for t in tab.twists:
            if -4 - t in tab:
                assert tab[t] == tuple(reversed(tab[-4 - t]))


def test_f_tables(f_tables, ee_tables):
    for m, tab in f_tables.items():
        assert tab.check_euler(lambda t: chi_F(m, t)) == []
        assert ee_tables[m].check_euler(lambda t: chi_EE(m, t)) == []
        for t in tab.twists:
            assert tab[t] == tuple(reversed(tab[-4 - t]))
    assert f_tables[1][0] == (0, 5, 0, 0)
    assert f_tables[2][0] == (0, 21, 0, 0)


def test_s2_subtraction_rejects_negative():
    bad = CohomologyTable("EtensorE", 1, {0: (0, 5, 0, 0)})
    with pytest.raises(ArithmeticError):
        s2_from_ee(bad)


@pytest.mark.parametrize("m", [1, 2])
def test_coh0(m):
    cert = verify_coh0(m)
    assert cert.passed, cert.witness
    assert cert.data["S2E"] == [0, 0, 0, 0]
    assert cert.data["EtensorE"] == [line_cohomology(0, 2 * m - 1), 0, 0, 0]


@pytest.mark.parametrize("m", [1, 2])
def test_lepotier_and_moduli(m):
    lp = verify_lepotier(m)
    assert lp.passed and lp.findings["outside_LP"]
    md = moduli_dimension_check(m)
    assert md.passed, md.witness
    assert md.data["S2E(0)"] == [0, 8 * charge(m) - 3, 0, 0]


def test_long_guard():
    with pytest.raises(LongRunRequired, match="requires --long"):
        verify_coh0(3)


@pytest.mark.long
def test_m3_long_runs():
    assert verify_coh0(3, long=True).passed
    assert moduli_dimension_check(3, long=True).passed
    assert verify_lepotier(3, long=True).passed


def test_policy_modes_agree():
    c = e_complex(2)
    assert hypercohomology(c, -3, policy=RankPolicy(mode="exact")).h == \
        hypercohomology(c, -3, policy=RankPolicy(mode="modular")).h
