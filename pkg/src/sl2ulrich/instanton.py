"""The SL2-equivariant instanton bundles E_m and their symmetric squares.

E_m is presented as the cokernel of

    0 -> O(-2m-1) --kappa--> V_{3m} ⊗ O(-m-1) --psi--> V_{3m+1} ⊗ O(-m) -> E_m -> 0

with psi the unique equivariant map with linear entries and kappa the unique
equivariant degree-m syzygy of psi.  F_m = S^2 E_m is handled through
E_m ⊗ E_m = F_m ⊕ O.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable

from .cech import CohomologyTable, hypercohomology, table
from .exactalg import DEFAULT_SEED, RankPolicy, SparseMatrix, certified_rank_rows, kernel_basis, rank
from .psheaf import (FreeComplex, PolyMatrix, chi_line, euler_characteristic, graded_dim,
                     line_cohomology, monomial_index, monomials, random_points,
                     tensor_complexes, verify_complex)
from .sl2 import (RepDecomposition, coefficients_to_matrix, equivariance_defect,
                  equivariant_maps, intertwining_system, rep_sheaf)

CONSTANT_RANK_POINTS = 20


class ResolutionError(RuntimeError):
    pass


class LongRunRequired(RuntimeError):
    pass


def charge(m: int) -> int:
    return comb(m + 1, 2)


def chi_E(m: int, t: int) -> int:
    """Riemann-Roch for a rank-2 bundle with c1 = c3 = 0, c2 = C(m+1, 2)."""
    return 2 * chi_line(t) - charge(m) * (t + 2)


def chi_F(m: int, t: int) -> int:
    """Rank 3, Chern classes (0, 4k, 0)."""
    return 3 * chi_line(t) - 4 * charge(m) * (t + 2)


def chi_EE(m: int, t: int) -> int:
    return chi_F(m, t) + chi_line(t)


@dataclass
class Check:
    label: str
    expected: object
    observed: object

    @property
    def ok(self) -> bool:
        return self.expected == self.observed

    def to_dict(self) -> dict:
        return {"label": self.label, "expected": self.expected, "observed": self.observed,
                "ok": self.ok}


@dataclass
class Certificate:
    name: str
    m: int | None = None
    checks: list = field(default_factory=list)
    findings: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)

    def check(self, label: str, expected, observed) -> Check:
        c = Check(label, expected, observed)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def witness(self) -> str | None:
        bad = next((c for c in self.checks if not c.ok), None)
        if bad is None:
            return None
        return f"{bad.label}: expected {bad.expected}, observed {bad.observed}"

    def to_dict(self) -> dict:
        return {"name": self.name, "m": self.m, "passed": self.passed, "witness": self.witness,
                "checks": [c.to_dict() for c in self.checks], "findings": self.findings,
                "data": self.data}


@dataclass(frozen=True, eq=False)
class EquivariantResolution:
    m: int
    kappa: PolyMatrix
    psi: PolyMatrix
    psi_solutions: int
    kappa_solutions: int
    point_ranks: tuple

    @property
    def charge(self) -> int:
        return charge(self.m)

    def complex(self) -> FreeComplex:
        return FreeComplex((self.kappa.source, self.psi.source, self.psi.target),
                           (self.kappa, self.psi), -2, f"E_{self.m}")


def _syzygy_rows(psi: PolyMatrix, m: int) -> list[dict]:
    """Constraints psi ∘ kappa = 0 on the coefficients of a (3m+1) x 1 column of degree-m forms."""
    mons = monomials(m)
    nm = len(mons)
    target_idx = monomial_index(m + 1)
    rows: dict = {}
    for (l, i), f in psi.entries.items():
        for mu, m0 in enumerate(mons):
            for beta, c in f.terms.items():
                nu = target_idx[tuple(a + b for a, b in zip(m0, beta))]
                key = (l, nu)
                row = rows.setdefault(key, {})
                var = i * nm + mu
                row[var] = row.get(var, 0) + c
    return [r for r in rows.values() if any(r.values())]


def _stack(system: SparseMatrix, extra: Iterable[dict]) -> SparseMatrix:
    data = dict(system.data)
    r = system.nrows
    for row in extra:
        for c, v in row.items():
            if v:
                data[r, c] = v
        r += 1
    return SparseMatrix(r, system.ncols, data)


def solve_kappa(psi: PolyMatrix, m: int) -> list[PolyMatrix]:
    """Basis of equivariant degree-m columns kappa with psi ∘ kappa = 0."""
    trivial, middle = RepDecomposition.irrep(0), RepDecomposition.irrep(3 * m)
    system = _stack(intertwining_system(trivial, middle, m), _syzygy_rows(psi, m))
    src, tgt = rep_sheaf(trivial, -2 * m - 1), psi.source
    return [coefficients_to_matrix(v, src, tgt, m) for v in kernel_basis(system)]


def constant_rank_ranks(psi: PolyMatrix, seed: int = DEFAULT_SEED,
                        count: int = CONSTANT_RANK_POINTS) -> tuple[int, ...]:
    rng = random.Random(seed)
    return tuple(rank(psi.evaluate(pt)).value for pt in random_points(rng, count))


@lru_cache(maxsize=None)
def build_resolution(m: int, seed: int = DEFAULT_SEED) -> EquivariantResolution:
    """Reconstruct psi and kappa and validate the resolution of E_m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    source, target = RepDecomposition.irrep(3 * m), RepDecomposition.irrep(3 * m + 1)
    psis = equivariant_maps(source, target, 1, source_twist=-m - 1, target_twist=-m)
    if len(psis) != 1:
        raise ResolutionError(f"psi solution space has dimension {len(psis)}, expected 1")
    psi = psis[0]
    kappas = solve_kappa(psi, m)
    if len(kappas) != 1:
        raise ResolutionError(f"kappa solution space has dimension {len(kappas)}, expected 1")
    kappa = kappas[0]
    if not psi.compose(kappa).is_zero():
        raise ResolutionError("psi ∘ kappa != 0")
    for A, s, t in ((psi, source, target), (kappa, RepDecomposition.irrep(0), source)):
        defect = equivariance_defect(A, s, t)
        if not all(defect.values()):
            raise ResolutionError(f"equivariance fails: {defect}")
    ranks = constant_rank_ranks(psi, seed)
    if set(ranks) != {3 * m}:
        raise ResolutionError(f"psi is not of constant rank {3 * m}: ranks {sorted(set(ranks))}")
    return EquivariantResolution(m, kappa, psi, len(psis), len(kappas), ranks)


@lru_cache(maxsize=None)
def e_complex(m: int) -> FreeComplex:
    return build_resolution(m).complex()


@lru_cache(maxsize=None)
def ee_complex(m: int) -> FreeComplex:
    E = e_complex(m)
    T = tensor_complexes(E, E)
    return FreeComplex(T.terms, T.maps, T.start, f"E_{m}⊗E_{m}")


def verify_exactness(res: EquivariantResolution, degree_bound: int | None = None,
                     policy: RankPolicy | None = None) -> Certificate:
    """Exactness of the graded module complex in degrees up to ``degree_bound``.

    In each degree t: kappa_t is injective and rank kappa_t + rank psi_t equals
    the dimension of the middle term.  The alternating Hilbert polynomial of
    the complex matches Riemann-Roch for E_m on [-3, bound], and the cokernel
    of psi_t has dimension chi(E_m(t)) once t >= 2m - 2.
    """
    m = res.m
    bound = 3 * m + 4 if degree_bound is None else degree_bound
    policy = policy or RankPolicy()
    cert = Certificate("exactness", m)
    c = res.complex()
    ok, where = verify_complex(c)
    cert.check("composition psi∘kappa vanishes", True, ok)
    if not ok:
        return cert
    for t in range(0, bound + 1):
        k_t = certified_rank_rows(res.kappa.degree_piece(t).rows(), policy)
        p_t = certified_rank_rows(res.psi.degree_piece(t).rows(), policy)
        left, mid = graded_dim(res.kappa.source, t), graded_dim(res.psi.source, t)
        cert.check(f"t={t}: kappa injective", left, k_t)
        cert.check(f"t={t}: exact at middle", mid, k_t + p_t)
        if t >= max(m, 2 * m - 2):  # H^3 rows of the resolution vanish from here on
            coker = graded_dim(res.psi.target, t) - p_t
            cert.check(f"t={t}: dim coker psi = chi(E(t))", chi_E(m, t), coker)
    for t in range(-3, bound + 1):
        cert.check(f"t={t}: Hilbert polynomial", chi_E(m, t), euler_characteristic(c, t))
    cert.data["degree_bound"] = bound
    return cert


def instanton_axioms(m: int, policy: RankPolicy | None = None) -> Certificate:
    policy = policy or RankPolicy()
    cert = Certificate("instanton", m)
    c = e_complex(m)
    cert.check("H*(E(-2))", (0, 0, 0, 0), hypercohomology(c, -2, policy=policy).h)
    cert.check("h*(E(-1))", (0, charge(m), 0, 0), hypercohomology(c, -1, policy=policy).h)
    bad = [t for t in range(-10, 11) if euler_characteristic(c, t) != chi_E(m, t)]
    cert.check("chi matches rank 2, c1=0, c2=k, c3=0", [], bad)
    cert.data["charge"] = charge(m)
    return cert


def _guard(m: int, long: bool, limit: int = 2):
    if m > limit and not long:
        raise LongRunRequired(f"m = {m} requires --long")


def ee_table(m: int, t_range: Iterable[int], policy: RankPolicy | None = None,
             jobs: int = 1, cache=None) -> CohomologyTable:
    ts = list(t_range)
    if cache is not None:
        hit = cache.get_table("EtensorE", m, ts, policy)
        if hit is not None:
            return hit
    tab = table(ee_complex(m), ts, sheaf="EtensorE", m=m, policy=policy, jobs=jobs)
    if cache is not None:
        cache.put_table(tab, policy)
    return tab


def e_table(m: int, t_range: Iterable[int], policy: RankPolicy | None = None,
            jobs: int = 1, cache=None) -> CohomologyTable:
    ts = list(t_range)
    if cache is not None:
        hit = cache.get_table("E", m, ts, policy)
        if hit is not None:
            return hit
    tab = table(e_complex(m), ts, sheaf="E", m=m, policy=policy, jobs=jobs)
    if cache is not None:
        cache.put_table(tab, policy)
    return tab


def line_table(n: int, t_range: Iterable[int]) -> CohomologyTable:
    rows = {t: tuple(line_cohomology(i, n + t) for i in range(4)) for t in t_range}
    return CohomologyTable(f"LineBundle({n})", None, rows, {"method": "closed form"})


def s2_from_ee(ee: CohomologyTable) -> CohomologyTable:
    rows = {}
    for t in ee.twists:
        h = tuple(x - line_cohomology(i, t) for i, x in enumerate(ee[t]))
        if min(h) < 0:
            raise ArithmeticError(f"negative S^2 dimension at t={t}: {h}")
        rows[t] = h
    return CohomologyTable("S2E", ee.m, rows, dict(ee.provenance, derived_from="EtensorE minus O"))


def s2_table(m: int, t_range: Iterable[int], policy: RankPolicy | None = None,
             jobs: int = 1, cache=None) -> CohomologyTable:
    return s2_from_ee(ee_table(m, t_range, policy, jobs, cache))


def verify_coh0(m: int, long: bool = False, policy: RankPolicy | None = None,
                cache=None) -> Certificate:
    """H*(F_m(d-2)) = 0 for d = 2m + 1, with the dimension identities around it."""
    _guard(m, long)
    d = 2 * m + 1
    cert = Certificate("coh0", m)
    ee = ee_table(m, [d - 2], policy, cache=cache)
    s2 = s2_from_ee(ee)
    cert.check(f"H*(F(d-2)) at t={d - 2}", (0, 0, 0, 0), s2[d - 2])
    cert.check("h0(E⊗E(d-2)) = h0(O(d-2))", line_cohomology(0, d - 2), ee[d - 2][0])
    cert.check("h0(E⊗E(d-2)) = h3(O(-d-2))", line_cohomology(3, -d - 2), ee[d - 2][0])
    # rows of E_m feeding the map f = H^1(psi ⊗ E_m(2m-1))
    E = e_complex(m)
    lo = hypercohomology(E, m - 2, policy=policy).h
    hi = hypercohomology(E, m - 1, policy=policy).h
    cert.check("H^k(E(m-2)) = 0 for k != 1", (0, 0, 0), (lo[0], lo[2], lo[3]))
    cert.check("H^k(E(m-1)) = 0 for k != 1", (0, 0, 0), (hi[0], hi[2], hi[3]))
    cert.check("h1(E(m-2)) = h3(O(-m-3))", line_cohomology(3, -m - 3), lo[1])
    cert.check("h1(E(m-1)) = h3(O(-m-2))", line_cohomology(3, -m - 2), hi[1])
    src, tgt = (3 * m + 1) * lo[1], (3 * m + 2) * hi[1]
    cert.check("dim ker f - dim coker f = dim source - dim target",
               src - tgt, ee[d - 2][0] - ee[d - 2][1])
    cert.data.update({"d": d, "twist": d - 2, "EtensorE": list(ee[d - 2]),
                      "S2E": list(s2[d - 2]), "f_source_dim": src, "f_target_dim": tgt})
    return cert


def verify_lepotier(m: int, long: bool = False, policy: RankPolicy | None = None,
                    cache=None) -> Certificate:
    """h^i(F_m(-2)); vanishing is reported as a finding, only chi = 0 is required."""
    _guard(m, long)
    cert = Certificate("lepotier", m)
    h = s2_from_ee(ee_table(m, [-2], policy, cache=cache))[-2]
    cert.check("chi(F(-2)) = 0", 0, h[0] - h[1] + h[2] - h[3])
    cert.findings["h(F(-2))"] = list(h)
    cert.findings["outside_LP"] = not any(h)
    return cert


def moduli_dimension_check(m: int, long: bool = False, policy: RankPolicy | None = None,
                           cache=None) -> Certificate:
    _guard(m, long)
    k = charge(m)
    cert = Certificate("moduli-dim", m)
    h = s2_from_ee(ee_table(m, [0], policy, cache=cache))[0]
    cert.check("h0(S2E)", 0, h[0])
    cert.check("h1(S2E) = 8k-3", 8 * k - 3, h[1])
    cert.check("h2(S2E)", 0, h[2])
    cert.data["S2E(0)"] = list(h)
    return cert


def natural_cohomology_finding(tab: CohomologyTable) -> dict:
    viol = [t for t in tab.twists if sum(1 for x in tab[t] if x) > 1]
    return {"natural": not viol, "violations": viol}
