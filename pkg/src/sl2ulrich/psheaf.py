"""Graded polynomial algebra on P^3: polynomials, twisted free sheaves,
polynomial matrices between them, bounded complexes and their tensor products.

Conventions used throughout the package:

* a monomial is a 4-tuple of exponents of ``x0..x3``;
* a map ``O(a) -> O(b)`` is multiplication by a form of degree ``b - a``;
* complexes are cohomological: ``maps[k]`` goes from ``terms[k]`` to
  ``terms[k + 1]``, sitting at positions ``start + k`` and ``start + k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, lcm, gcd
from typing import Iterable, Sequence

from .exactalg import SparseMatrix

NVARS = 4
Monomial = tuple  # (e0, e1, e2, e3)


@lru_cache(maxsize=None)
def monomials(degree: int) -> tuple[Monomial, ...]:
    """All monomials of ``degree`` in four variables, lexicographically descending."""
    if degree < 0:
        return ()
    out = []
    for a in range(degree, -1, -1):
        for b in range(degree - a, -1, -1):
            for c in range(degree - a - b, -1, -1):
                out.append((a, b, c, degree - a - b - c))
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(degree: int) -> dict:
    return {m: i for i, m in enumerate(monomials(degree))}


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])


class Poly:
    """Homogeneous polynomial in x0..x3 with rational coefficients."""

    __slots__ = ("terms", "degree")

    def __init__(self, terms: dict | None = None, degree: int | None = None):
        terms = {tuple(m): Fraction(c) for m, c in (terms or {}).items() if c}
        degs = {sum(m) for m in terms}
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous polynomial, degrees {sorted(degs)}")
        if degs:
            d = degs.pop()
            if degree is not None and degree != d:
                raise ValueError(f"stated degree {degree} but terms have degree {d}")
            degree = d
        self.terms = terms
        self.degree = degree

    @classmethod
    def var(cls, i: int) -> "Poly":
        e = [0] * NVARS
        e[i] = 1
        return cls({tuple(e): 1})

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(0, 0, 0, 0): c}, 0)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, reverse=True):
            c = self.terms[m]
            mon = "*".join(f"x{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(m) if e)
            parts.append(f"{c}" + (f"*{mon}" if mon else ""))
        return " + ".join(parts)

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out, self.degree if self.degree is not None else other.degree)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()}, self.degree)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return Poly({m: c * other for m, c in self.terms.items()}, self.degree)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        deg = None
        if self.degree is not None and other.degree is not None:
            deg = self.degree + other.degree
        return Poly(out, deg)

    __rmul__ = __mul__

    def evaluate(self, point: Sequence) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for x, e in zip(point, m):
                if e:
                    v *= Fraction(x) ** e
            total += v
        return total

    def diff(self, i: int) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                e = list(m)
                e[i] -= 1
                out[tuple(e)] = c * m[i]
        return Poly(out, None if self.degree is None else max(self.degree - 1, 0))


def binom_poly(n: int, k: int = 3) -> Fraction:
    """C(n, k) evaluated as a polynomial in n (so it may be negative)."""
    num = 1
    for i in range(k):
        num *= n - i
    den = 1
    for i in range(1, k + 1):
        den *= i
    return Fraction(num, den)


def chi_line(n: int) -> int:
    """Euler characteristic of O(n) on P^3."""
    return int(binom_poly(n + 3, 3))


def line_cohomology(i: int, t: int) -> int:
    """Dimension of H^i(P^3, O(t))."""
    if not 0 <= i <= 3:
        raise ValueError("cohomological degree must be in 0..3")
    if i == 0:
        return comb(t + 3, 3) if t >= 0 else 0
    if i == 3:
        return comb(-t - 1, 3) if t <= -4 else 0
    return 0


@dataclass(frozen=True)
class FreeSheaf:
    """Direct sum O(a_1) + ... + O(a_s).

    ``weights`` are optional torus weights of the summand generators (used to
    split computations by weight); ``label`` is an optional representation
    decomposition of the multiplicity space.
    """

    twists: tuple
    weights: tuple | None = None
    label: object = None

    def __post_init__(self):
        object.__setattr__(self, "twists", tuple(int(a) for a in self.twists))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
            if len(self.weights) != len(self.twists):
                raise ValueError("weights must match the number of summands")
        if self.label is not None and self.label.dim != len(self.twists):
            raise ValueError(f"label dimension {self.label.dim} != rank {len(self.twists)}")

    @classmethod
    def uniform(cls, twist: int, rank: int, weights=None, label=None) -> "FreeSheaf":
        return cls((twist,) * rank, weights, label)

    @property
    def rank(self) -> int:
        return len(self.twists)

    def __len__(self):
        return len(self.twists)

    def describe(self) -> str:
        groups: dict = {}
        for a in self.twists:
            groups[a] = groups.get(a, 0) + 1
        return " + ".join(f"O({a})^{n}" if n > 1 else f"O({a})" for a, n in sorted(groups.items()))


@dataclass(frozen=True, eq=False)
class PolyMatrix:
    """Map ``source -> target`` of free sheaves; ``entries[i, j]`` maps summand j to summand i."""

    source: FreeSheaf
    target: FreeSheaf
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), f in self.entries.items():
            if not (0 <= i < self.target.rank and 0 <= j < self.source.rank):
                raise IndexError(f"entry ({i}, {j}) out of range")
            if not isinstance(f, Poly):
                f = Poly.const(f)
            if f.is_zero():
                continue
            need = self.target.twists[i] - self.source.twists[j]
            if f.degree != need:
                raise ValueError(f"entry ({i}, {j}) has degree {f.degree}, expected {need}")
            clean[i, j] = f
        object.__setattr__(self, "entries", clean)

    @property
    def shape(self):
        return self.target.rank, self.source.rank

    def __getitem__(self, ij) -> Poly:
        return self.entries.get(ij, Poly())

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return (self.source.twists == other.source.twists
                and self.target.twists == other.target.twists
                and self.entries == other.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def max_degree(self) -> int:
        return max((f.degree for f in self.entries.values()), default=0)

    def columns(self) -> list[list]:
        """Per source summand, the list of ``(row, [(monomial, coeff), ...])``."""
        cols: list[list] = [[] for _ in range(self.source.rank)]
        for (i, j), f in sorted(self.entries.items()):
            cols[j].append((i, list(f.terms.items())))
        return cols

    def compose(self, first: "PolyMatrix") -> "PolyMatrix":
        """``self ∘ first``."""
        if first.target.twists != self.source.twists:
            raise ValueError("cannot compose: target/source mismatch")
        acc: dict = {}
        by_row: dict = {}
        for (k, j), g in first.entries.items():
            by_row.setdefault(k, []).append((j, g))
        for (i, k), f in self.entries.items():
            for j, g in by_row.get(k, ()):
                prod = f * g
                acc[i, j] = acc[i, j] + prod if (i, j) in acc else prod
        return PolyMatrix(first.source, self.target, acc)

    def scale(self, c) -> "PolyMatrix":
        return PolyMatrix(self.source, self.target, {ij: f * c for ij, f in self.entries.items()})

    def evaluate(self, point: Sequence) -> SparseMatrix:
        return SparseMatrix(self.target.rank, self.source.rank,
                            {ij: f.evaluate(point) for ij, f in self.entries.items()})

    def integral(self) -> "PolyMatrix":
        """Positive rational multiple with coprime integer coefficients."""
        den = 1
        for f in self.entries.values():
            for c in f.terms.values():
                den = lcm(den, c.denominator)
        g = 0
        for f in self.entries.values():
            for c in f.terms.values():
                g = gcd(g, int(c * den))
        if not g:
            return self
        return self.scale(Fraction(den, g))

    def degree_piece(self, t: int) -> SparseMatrix:
        """Matrix of the induced map on degree-``t`` global sections.

        Columns are (summand j, monomial of degree a_j + t) and rows are
        (summand i, monomial of degree b_i + t), both summand-major.
        """
        col_off, row_off = _offsets(self.source.twists, t), _offsets(self.target.twists, t)
        data = {}
        for (i, j), f in self.entries.items():
            src = monomials(self.source.twists[j] + t)
            tidx = monomial_index(self.target.twists[i] + t)
            for k, m in enumerate(src):
                for mm, c in f.terms.items():
                    r = row_off[i] + tidx[mono_mul(m, mm)]
                    key = (r, col_off[j] + k)
                    data[key] = data.get(key, 0) + c
        return SparseMatrix(row_off[-1], col_off[-1], data)


def _offsets(twists, t):
    off = [0]
    for a in twists:
        off.append(off[-1] + len(monomials(a + t)))
    return off


def graded_dim(sheaf: FreeSheaf, t: int) -> int:
    return sum(len(monomials(a + t)) for a in sheaf.twists)


@dataclass(frozen=True, eq=False)
class FreeComplex:
    """Bounded complex of free sheaves placed at positions ``start .. start + len(terms) - 1``."""

    terms: tuple
    maps: tuple
    start: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "maps", tuple(self.maps))
        if len(self.maps) != max(len(self.terms) - 1, 0):
            raise ValueError("need exactly one map between consecutive terms")
        for k, d in enumerate(self.maps):
            if d.source.twists != self.terms[k].twists or d.target.twists != self.terms[k + 1].twists:
                raise ValueError(f"map at position {self.start + k} does not match its terms")

    @property
    def positions(self) -> range:
        return range(self.start, self.start + len(self.terms))

    def term(self, p: int) -> FreeSheaf:
        return self.terms[p - self.start]

    def differential(self, p: int) -> PolyMatrix:
        """Map from position ``p`` to ``p + 1``."""
        return self.maps[p - self.start]

    @property
    def length(self) -> int:
        return len(self.terms)

    def has_weights(self) -> bool:
        return all(s.weights is not None for s in self.terms)

    def max_entry_degree(self) -> int:
        return max((d.max_degree() for d in self.maps), default=0)

    def integral(self) -> "FreeComplex":
        """Same complex with each differential rescaled to coprime integer coefficients."""
        return FreeComplex(self.terms, [d.integral() for d in self.maps], self.start, self.name)

    def describe(self) -> str:
        return " -> ".join(f"[{p}] {s.describe()}" for p, s in zip(self.positions, self.terms))


def single_term(sheaf: FreeSheaf, position: int = 0, name: str = "") -> FreeComplex:
    return FreeComplex((sheaf,), (), position, name)


def euler_characteristic(c: FreeComplex, t: int) -> int:
    """Alternating sum over positions of chi(O(a + t)), polynomially extended."""
    total = 0
    for p, sheaf in zip(c.positions, c.terms):
        s = sum(chi_line(a + t) for a in sheaf.twists)
        total += s if p % 2 == 0 else -s
    return total


def hilbert_alternating(c: FreeComplex, t: int) -> int:
    """Alternating sum of the actual graded dimensions (monomial counts)."""
    total = 0
    for p, sheaf in zip(c.positions, c.terms):
        s = graded_dim(sheaf, t)
        total += s if p % 2 == 0 else -s
    return total


def _tensor_sheaf(A: FreeSheaf, B: FreeSheaf) -> FreeSheaf:
    twists = [a + b for a in A.twists for b in B.twists]
    weights = None
    if A.weights is not None and B.weights is not None:
        weights = [u + v for u in A.weights for v in B.weights]
    return FreeSheaf(tuple(twists), None if weights is None else tuple(weights))


def _direct_sum(parts: Sequence[FreeSheaf]) -> FreeSheaf:
    twists = tuple(a for s in parts for a in s.twists)
    if all(s.weights is not None for s in parts):
        weights = tuple(w for s in parts for w in s.weights)
    else:
        weights = None
    labels = [s.label for s in parts]
    label = None
    if parts and all(lab is not None for lab in labels):
        label = labels[0]
        for lab in labels[1:]:
            label = label + lab
    return FreeSheaf(twists, weights, label)


def tensor_complexes(A: FreeComplex, B: FreeComplex) -> FreeComplex:
    """Total complex of A ⊗ B; the B-differential carries the sign (-1)^i on A^i ⊗ B^j."""
    from .sl2 import tensor_labels

    blocks: dict[int, list[tuple[int, int]]] = {}
    for i in A.positions:
        for j in B.positions:
            blocks.setdefault(i + j, []).append((i, j))
    positions = sorted(blocks)

    terms, offsets = [], {}
    for n in positions:
        parts, off = [], 0
        for i, j in blocks[n]:
            s = _tensor_sheaf(A.term(i), B.term(j))
            la, lb = A.term(i).label, B.term(j).label
            if la is not None and lb is not None:
                s = FreeSheaf(s.twists, s.weights, tensor_labels(la, lb))
            parts.append(s)
            offsets[i, j] = off
            off += s.rank
        terms.append(_direct_sum(parts))

    maps = []
    for n in positions[:-1]:
        entries: dict = {}
        for i, j in blocks[n]:
            rb = B.term(j).rank
            src = offsets[i, j]
            if i + 1 in A.positions:
                dst = offsets[i + 1, j]
                for (k2, k), f in A.differential(i).entries.items():
                    for l in range(rb):
                        entries[dst + k2 * rb + l, src + k * rb + l] = f
            if j + 1 in B.positions:
                dst = offsets[i, j + 1]
                rb2 = B.term(j + 1).rank
                sign = -1 if i % 2 else 1
                for (l2, l), f in B.differential(j).entries.items():
                    for k in range(A.term(i).rank):
                        entries[dst + k * rb2 + l2, src + k * rb + l] = f * sign
        maps.append(PolyMatrix(terms[positions.index(n)], terms[positions.index(n) + 1], entries))
    name = f"({A.name})⊗({B.name})" if A.name or B.name else ""
    out = FreeComplex(tuple(terms), tuple(maps), positions[0], name)
    ok, where = verify_complex(out)
    if not ok:
        raise AssertionError(f"tensor product is not a complex at position {where}")
    return out


def verify_complex(c: FreeComplex) -> tuple[bool, int | None]:
    """Check every composite of consecutive differentials vanishes.

    Returns ``(True, None)`` or ``(False, p)`` with ``p`` the position of the
    first map of the offending pair.
    """
    for k in range(len(c.maps) - 1):
        if not c.maps[k + 1].compose(c.maps[k]).is_zero():
            return False, c.start + k
    return True, None


def random_points(rng, count: int, bound: int = 9) -> list[tuple[int, ...]]:
    pts = []
    while len(pts) < count:
        p = tuple(rng.randint(-bound, bound) for _ in range(NVARS))
        if any(p):
            pts.append(p)
    return pts


def monomials_with_bounds(degree: int, lower: Sequence[int]) -> Iterable[Monomial]:
    """Monomials of total ``degree`` with exponent i >= lower[i]."""
    shift = sum(lower)
    for m in monomials(degree - shift):
        yield tuple(e + lo for e, lo in zip(m, lower))


__all__ = [
    "FreeComplex", "FreeSheaf", "Poly", "PolyMatrix", "binom_poly", "chi_line",
    "euler_characteristic", "graded_dim", "hilbert_alternating", "line_cohomology",
    "monomials", "monomials_with_bounds", "random_points", "single_term",
    "tensor_complexes", "verify_complex",
]
