"""Hypercohomology of twisted free complexes on P^3 via Čech cochains.

The cover is the standard one by the four coordinate charts.  For a summand
O(n) and a nonempty subset I of {0,1,2,3}, the Čech module on U_I is spanned
by Laurent monomials x^a of degree n whose negative exponents lie in I.  The
truncated model keeps exponents >= -B; multiplication by polynomials and
Čech restriction both preserve that bound, so for every B the truncation is
a subcomplex of the Čech total complex, equal to it in cohomology once B is
large.

Two ways of computing the cohomology of the truncated total complex are
provided:

* ``method="assembled"`` writes out every Čech cochain and takes ranks of the
  total differentials.  Only feasible for small complexes and twists.
* ``method="reduced"`` (default) contracts the Čech complex of each summand
  onto its cohomology (the H^0 row of polynomials and the H^3 row of
  all-negative monomials) using an explicit cone homotopy, and transfers the
  total differential along the contraction.  The transferred differential has
  a row-preserving part and, for complexes with five or more terms, a part
  going from the H^3 row at position p to the H^0 row at position p + 4.

Both compute exactly the same numbers at a given bound, which the test suite
checks.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .exactalg import RankPolicy, certified_rank_rows
from .psheaf import FreeComplex, euler_characteristic, monomials, monomials_with_bounds
from .sl2 import monomial_weight

log = logging.getLogger(__name__)

FULL = 0b1111
MAX_BOUND = 256


class CohomologyError(RuntimeError):
    """Certification failure inside the hypercohomology engine."""


class InstabilityError(CohomologyError):
    pass


class EulerMismatchError(CohomologyError):
    pass


def _popcount(x: int) -> int:
    return bin(x).count("1")


def subset_mask(subset: Iterable[int]) -> int:
    mask = 0
    for i in subset:
        mask |= 1 << i
    return mask


def neg_mask(alpha) -> int:
    mask = 0
    for i, a in enumerate(alpha):
        if a < 0:
            mask |= 1 << i
    return mask


@dataclass(frozen=True)
class CechPiece:
    """Truncated Čech module of O(twist) on the chart intersection U_I."""

    subset: tuple
    twist: int
    bound: int

    def __post_init__(self):
        s = tuple(sorted(set(self.subset)))
        if not s or not set(s) <= {0, 1, 2, 3}:
            raise ValueError("subset must be a nonempty subset of {0,1,2,3}")
        if self.bound < 1:
            raise ValueError("truncation bound must be >= 1")
        object.__setattr__(self, "subset", s)

    @property
    def mask(self) -> int:
        return subset_mask(self.subset)

    def basis(self) -> list[tuple]:
        lower = [-self.bound if i in self.subset else 0 for i in range(4)]
        return list(monomials_with_bounds(self.twist, lower))


def h3_monomials(n: int, bound: int | None = None) -> list[tuple]:
    """All-negative monomials of degree ``n`` (a basis of H^3(O(n))), exponents >= -bound."""
    out = []
    for beta in monomials(-n - 4):
        if bound is not None and max(beta) > bound - 1:
            continue
        out.append(tuple(-1 - b for b in beta))
    return out


def sufficient_bound(c: FreeComplex, t: int) -> int:
    """Smallest bound at which every summand's H^3 row is complete."""
    lowest = min((a + t for s in c.terms for a in s.twists), default=0)
    return max(1, -lowest - 3)


def default_bound(c: FreeComplex, t: int) -> int:
    return max(2, c.max_entry_degree() + abs(t) // 2)


@dataclass
class TwistCohomology:
    """Hypercohomology dimensions of one twist, with provenance."""

    t: int
    h: tuple
    bound: int
    chain_dims: dict = field(default_factory=dict)
    euler: int = 0
    method: str = "reduced"
    ranks: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.h)

    def __getitem__(self, i):
        return self.h[i]

    def __eq__(self, other):
        if isinstance(other, TwistCohomology):
            return self.h == other.h
        return tuple(self.h) == tuple(other)


# --- preparation ------------------------------------------------------------


class _Prepared:
    """Integer-coefficient view of a complex: per position, per source summand, its column."""

    def __init__(self, c: FreeComplex):
        c = c.integral()
        self.complex = c
        self.start = c.start
        self.stop = c.start + c.length
        self.twists = {p: c.term(p).twists for p in c.positions}
        self.graded = c.has_weights() and _homogeneous(c)
        self.weights = {p: (c.term(p).weights if self.graded else (0,) * c.term(p).rank)
                        for p in c.positions}
        self.cols = {}
        for p in c.positions:
            if p + 1 in c.positions:
                cols = []
                for col in c.differential(p).columns():
                    cols.append([(i, [(m, int(v)) for m, v in terms]) for i, terms in col])
                self.cols[p] = cols


def _homogeneous(c: FreeComplex) -> bool:
    for k, d in enumerate(c.maps):
        ws, wt = c.terms[k].weights, c.terms[k + 1].weights
        for (i, j), f in d.entries.items():
            for m in f.terms:
                if ws[j] != wt[i] + monomial_weight(m):
                    return False
    return True


def _weight(prep: _Prepared, p: int, k: int, alpha) -> int:
    return prep.weights[p][k] + (monomial_weight(alpha) if prep.graded else 0)


# --- reduced (two-row) model ------------------------------------------------


def _reduced_generators(prep: _Prepared, t: int, bound: int):
    """Generators of the contracted complex, keyed by (row, position, summand, monomial)."""
    gens = []
    for p in range(prep.start, prep.stop):
        for k, a in enumerate(prep.twists[p]):
            n = a + t
            for alpha in monomials(n):
                gens.append((0, p, k, alpha))
            for alpha in h3_monomials(n, bound):
                gens.append((3, p, k, alpha))
    return gens


def _contract(key):
    """Cone homotopy on one Čech basis element (summand, I, alpha); None if it vanishes."""
    k, I, alpha = key
    N = neg_mask(alpha)
    if N == FULL:
        return None
    c = 0
    while N >> c & 1:
        c += 1
    if not (I >> c & 1) or _popcount(I) < 2:
        return None
    sign = -1 if _popcount(I & ((1 << c) - 1)) % 2 else 1
    return (k, I & ~(1 << c), alpha), sign


def _apply_d(prep: _Prepared, p: int, vec: dict) -> dict:
    """Signed horizontal differential (-1)^q d from position p to p + 1."""
    out: dict = {}
    cols = prep.cols[p]
    for (k, I, alpha), coeff in vec.items():
        if _popcount(I) % 2 == 0:  # q = |I| - 1 odd
            coeff = -coeff
        for i, terms in cols[k]:
            for beta, v in terms:
                key = (i, I, (alpha[0] + beta[0], alpha[1] + beta[1],
                              alpha[2] + beta[2], alpha[3] + beta[3]))
                nv = out.get(key, 0) + coeff * v
                if nv:
                    out[key] = nv
                else:
                    out.pop(key, None)
    return out


def _apply_h(vec: dict) -> dict:
    out: dict = {}
    for key, coeff in vec.items():
        r = _contract(key)
        if r is None:
            continue
        nk, s = r
        nv = out.get(nk, 0) + s * coeff
        if nv:
            out[nk] = nv
        else:
            out.pop(nk, None)
    return out


def _reduced_image(prep: _Prepared, gen, index: dict, long_reach: bool) -> dict:
    """Image of a generator under the transferred differential, as {generator index: coeff}."""
    row, p, k, alpha = gen
    out: dict = {}
    if p + 1 >= prep.stop:
        return out

    def add(key, v):
        j = index.get(key)
        if j is None:
            return
        nv = out.get(j, 0) + v
        if nv:
            out[j] = nv
        else:
            out.pop(j, None)

    if row == 0:
        for i, terms in prep.cols[p][k]:
            for beta, v in terms:
                add((0, p + 1, i, tuple(a + b for a, b in zip(alpha, beta))), v)
        return out

    vec = _apply_d(prep, p, {(k, FULL, alpha): 1})
    for (i, I, gamma), v in vec.items():
        if I == FULL and neg_mask(gamma) == FULL:
            add((3, p + 1, i, gamma), v)
    if not long_reach or p + 4 >= prep.stop:
        return out
    # the only other surviving term: -pi (d h)^3 d iota, landing in the H^0 row four steps right
    for step in range(1, 4):
        vec = _apply_d(prep, p + step, _apply_h(vec))
        if not vec:
            return out
    for (i, I, gamma), v in vec.items():
        if I == 1 and min(gamma) >= 0:
            add((0, p + 4, i, gamma), -v)
    return out


def _reduced_complex(prep: _Prepared, t: int, bound: int):
    gens = _reduced_generators(prep, t, bound)
    index = {g: j for j, g in enumerate(gens)}
    has_h0 = {p: any(a + t >= 0 for a in prep.twists[p]) for p in range(prep.start, prep.stop)}
    degrees, blocks = {}, {}
    for j, g in enumerate(gens):
        row, p, k, alpha = g
        n = p + row
        w = _weight(prep, p, k, alpha)
        degrees[j] = n
        long_reach = row == 3 and has_h0.get(p + 4, False)
        img = _reduced_image(prep, g, index, long_reach)
        blocks.setdefault((n, w), []).append(img)
    return gens, degrees, blocks


# --- assembled model --------------------------------------------------------


def _cech_sign(j: int, I: int) -> int:
    return -1 if _popcount(I & ((1 << j) - 1)) % 2 else 1


def assembled_basis(prep: _Prepared, t: int, bound: int):
    basis = []
    subsets = [I for I in range(1, 16)]
    for p in range(prep.start, prep.stop):
        for k, a in enumerate(prep.twists[p]):
            for I in subsets:
                piece = CechPiece(tuple(i for i in range(4) if I >> i & 1), a + t, bound)
                for alpha in piece.basis():
                    basis.append((p, k, I, alpha))
    return basis


def _assembled_complex(prep: _Prepared, t: int, bound: int):
    basis = assembled_basis(prep, t, bound)
    index = {b: j for j, b in enumerate(basis)}
    degrees, blocks = {}, {}
    for j, (p, k, I, alpha) in enumerate(basis):
        n = p + _popcount(I) - 1
        degrees[j] = n
        img: dict = {}
        for i in range(4):  # Čech restriction
            if I >> i & 1:
                continue
            key = (p, k, I | (1 << i), alpha)
            img[index[key]] = img.get(index[key], 0) + _cech_sign(i, I)
        if p + 1 < prep.stop:
            for (i, I2, gamma), v in _apply_d(prep, p, {(k, I, alpha): 1}).items():
                jj = index[(p + 1, i, I2, gamma)]
                img[jj] = img.get(jj, 0) + v
        img = {a: v for a, v in img.items() if v}
        blocks.setdefault((n, _weight(prep, p, k, alpha)), []).append(img)
    return basis, degrees, blocks


# --- driver -----------------------------------------------------------------


def _cohomology_from_blocks(degrees: dict, blocks: dict, policy: RankPolicy):
    dims: dict = {}
    for n in degrees.values():
        dims[n] = dims.get(n, 0) + 1
    rank_out: dict = {}
    for (n, _w), rows in blocks.items():
        rank_out[n] = rank_out.get(n, 0) + certified_rank_rows(rows, policy)
    coh = {n: dims[n] - rank_out.get(n, 0) - rank_out.get(n - 1, 0) for n in dims}
    return dims, rank_out, coh


def _chain_dims(prep: _Prepared, t: int, bound: int, method: str) -> dict:
    dims: dict = {}
    if method == "reduced":
        for row, p, _k, _a in _reduced_generators(prep, t, bound):
            dims[p + row] = dims.get(p + row, 0) + 1
    else:
        for p, _k, I, _a in assembled_basis(prep, t, bound):
            n = p + _popcount(I) - 1
            dims[n] = dims.get(n, 0) + 1
    return dims


def _compute_at(prep: _Prepared, t: int, bound: int, method: str, policy: RankPolicy):
    build = _reduced_complex if method == "reduced" else _assembled_complex
    _basis, degrees, blocks = build(prep, t, bound)
    return _cohomology_from_blocks(degrees, blocks, policy)


def _nonzero(coh: dict) -> dict:
    return {n: v for n, v in coh.items() if v}


def hypercohomology(c: FreeComplex, t: int, bound: int | None = None,
                    policy: RankPolicy | None = None, method: str = "reduced",
                    max_bound: int = MAX_BOUND) -> TwistCohomology:
    """Dimensions h^0..h^3 of the hypercohomology of ``c`` twisted by ``t``.

    The truncated model is evaluated at bounds B and B + 1; when they differ
    B is doubled (up to ``max_bound``).  The result is certified against the
    Euler characteristic of the complex and nonzero cohomology outside
    degrees 0..3 is an error.
    """
    if method not in ("reduced", "assembled"):
        raise ValueError(f"unknown method {method!r}")
    policy = policy or RankPolicy()
    prep = c if isinstance(c, _Prepared) else _Prepared(c)
    B = bound if bound is not None else default_bound(prep.complex, t)
    if B < 1:
        raise ValueError("truncation bound must be >= 1")
    while True:
        if method == "reduced":
            if _chain_dims(prep, t, B, method) == _chain_dims(prep, t, B + 1, method):
                # B + 1 adds no generators: the two contracted complexes coincide
                dims, rank_out, coh = _compute_at(prep, t, B, method, policy)
                break
        else:
            dims, rank_out, coh = _compute_at(prep, t, B, method, policy)
            coh_next = _compute_at(prep, t, B + 1, method, policy)[2]
            if _nonzero(coh) == _nonzero(coh_next):
                break
        log.debug("bound %d unstable at twist %d, doubling", B, t)
        B *= 2
        if B > max_bound:
            raise InstabilityError(f"truncation did not stabilise below bound {max_bound} at twist {t}")

    stray = {n: v for n, v in coh.items() if v and not 0 <= n <= 3}
    if stray:
        raise CohomologyError(f"cohomology outside degrees 0..3 at twist {t}: {stray}")
    h = tuple(coh.get(i, 0) for i in range(4))
    chi = euler_characteristic(prep.complex, t)
    alt = sum((-1) ** n * v for n, v in coh.items())
    if alt != chi:
        raise EulerMismatchError(f"twist {t}: alternating sum {alt} != Euler characteristic {chi}")
    return TwistCohomology(t, h, B, dims, chi, method, rank_out)


def fast_path_two_row(c: FreeComplex, t: int, policy: RankPolicy | None = None) -> TwistCohomology:
    """Cohomology from the H^0 and H^3 rows alone (valid for complexes of at most four terms).

    Row 0 uses the degree-t pieces of the differentials on polynomial
    monomials; row 3 uses all-negative monomials, dropping any product that
    leaves the all-negative region.
    """
    if c.length > 4:
        raise ValueError("fast path refused: complexes with five or more terms can carry a "
                         "differential from the H^3 row to the H^0 row")
    policy = policy or RankPolicy()
    c = c.integral()
    row0_dim, row3_dim, row0_rank, row3_rank = {}, {}, {}, {}
    for p in c.positions:
        s = c.term(p)
        row0_dim[p] = sum(len(monomials(a + t)) for a in s.twists)
        row3_dim[p] = sum(len(h3_monomials(a + t)) for a in s.twists)
    for p in list(c.positions)[:-1]:
        d = c.differential(p)
        row0_rank[p] = certified_rank_rows(d.degree_piece(t).rows(), policy)
        row3_rank[p] = certified_rank_rows(_negative_piece_rows(d, t), policy)
    h = [0, 0, 0, 0]
    for p in c.positions:
        r0 = row0_dim[p] - row0_rank.get(p, 0) - row0_rank.get(p - 1, 0)
        r3 = row3_dim[p] - row3_rank.get(p, 0) - row3_rank.get(p - 1, 0)
        for deg, v in ((p, r0), (p + 3, r3)):
            if 0 <= deg <= 3:
                h[deg] += v
            elif v:
                raise CohomologyError(f"cohomology in degree {deg} at twist {t}")
    chi = euler_characteristic(c, t)
    if h[0] - h[1] + h[2] - h[3] != chi:
        raise EulerMismatchError(f"fast path at twist {t}: Euler characteristic mismatch")
    return TwistCohomology(t, tuple(h), 0, {}, chi, "fast_path")


def _negative_piece_rows(d, t: int) -> list[dict]:
    """Rows (one per source basis element) of the H^3-row map induced by ``d``."""
    tidx = {}
    off = 0
    for i, b in enumerate(d.target.twists):
        for m in h3_monomials(b + t):
            tidx[i, m] = off
            off += 1
    cols = d.columns()
    rows = []
    for j, a in enumerate(d.source.twists):
        for alpha in h3_monomials(a + t):
            row: dict = {}
            for i, terms in cols[j]:
                for beta, v in terms:
                    gamma = tuple(x + y for x, y in zip(alpha, beta))
                    key = tidx.get((i, gamma))
                    if key is not None:
                        row[key] = row.get(key, 0) + int(v)
            rows.append({k: v for k, v in row.items() if v})
    return rows


# --- tables ------------------------------------------------------------------


@dataclass
class CohomologyTable:
    """Map twist -> (h0, h1, h2, h3) for one sheaf, with provenance."""

    sheaf: str
    m: int | None = None
    rows: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __getitem__(self, t: int) -> tuple:
        return self.rows[t]

    def __contains__(self, t: int) -> bool:
        return t in self.rows

    def __len__(self):
        return len(self.rows)

    @property
    def twists(self) -> list[int]:
        return sorted(self.rows)

    def h(self, i: int, t: int) -> int:
        return self.rows[t][i]

    def check_euler(self, chi: Callable[[int], int]) -> list[int]:
        """Twists whose alternating sum disagrees with ``chi``."""
        return [t for t, h in sorted(self.rows.items()) if h[0] - h[1] + h[2] - h[3] != chi(t)]

    def to_dict(self) -> dict:
        return {
            "sheaf": self.sheaf,
            "m": self.m,
            "entries": [{"t": t, "h": list(self.rows[t])} for t in self.twists],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CohomologyTable":
        rows = {int(e["t"]): tuple(int(x) for x in e["h"]) for e in data["entries"]}
        return cls(data["sheaf"], data.get("m"), rows, dict(data.get("provenance", {})))

    def render(self, fmt: str = "md") -> str:
        ts = self.twists
        if fmt == "csv":
            lines = ["t,h0,h1,h2,h3"] + [",".join(map(str, (t, *self.rows[t]))) for t in ts]
            return "\n".join(lines) + "\n"
        header = "| i \\ t | " + " | ".join(str(t) for t in ts) + " |"
        sep = "|---" * (len(ts) + 1) + "|"
        body = []
        for i in (3, 2, 1, 0):
            cells = [str(self.rows[t][i]) if self.rows[t][i] else "." for t in ts]
            body.append(f"| h^{i} | " + " | ".join(cells) + " |")
        return "\n".join([f"{self.sheaf}" + (f" (m={self.m})" if self.m else ""), "",
                          header, sep, *body]) + "\n"


def _table_worker(args):
    complex_, t, bound, policy_cfg, method = args
    policy = RankPolicy(**policy_cfg)
    res = hypercohomology(complex_, t, bound, policy, method)
    return t, res.h, res.bound


def table(c: FreeComplex, t_range: Sequence[int], sheaf: str = "", m: int | None = None,
          bound: int | None = None, policy: RankPolicy | None = None, method: str = "reduced",
          jobs: int = 1) -> CohomologyTable:
    """Hypercohomology over a range of twists; rows computed independently."""
    policy = policy or RankPolicy()
    ts = list(t_range)
    tab = CohomologyTable(sheaf or c.name, m)
    bounds = {}
    if jobs > 1 and len(ts) > 1:
        cfg = {"mode": policy.mode, "seed": policy.seed,
               "exact_threshold": policy.exact_threshold, "primes": tuple(policy.primes)}
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for t, h, B in pool.map(_table_worker, [(c, t, bound, cfg, method) for t in ts]):
                tab.rows[t], bounds[t] = h, B
    else:
        prep = _Prepared(c)
        for t in ts:
            res = hypercohomology(prep, t, bound, policy, method)
            tab.rows[t], bounds[t] = res.h, res.bound
    tab.provenance = {
        "method": method,
        "bounds": {str(t): b for t, b in sorted(bounds.items())},
        "euler_certified": True,
        "stability": "B and B+1 agree",
        **{"rank_" + k: v for k, v in policy.describe().items()},
    }
    return tab
