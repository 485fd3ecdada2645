"""Exact sparse linear algebra over Q and over prime fields.

Matrices are stored sparsely as ``{(row, col): value}`` with rational values.
Ranks can be computed exactly (fraction-free elimination over Z after clearing
denominators) or modulo word-sized primes; :func:`certified_rank` runs both
and refuses to return on disagreement.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from sympy import nextprime

DEFAULT_EXACT_THRESHOLD = 200_000
DEFAULT_SEED = 20231017


class BadPrimeError(ArithmeticError):
    """A prime divides a denominator of the matrix being reduced."""

    def __init__(self, prime: int):
        super().__init__(f"bad prime {prime}: divides a denominator")
        self.prime = prime


class RankMismatchError(RuntimeError):
    pass


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Immutable sparse matrix with exact rational entries."""

    nrows: int
    ncols: int
    data: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        clean = {}
        for (r, c), v in self.data.items():
            if not (0 <= r < self.nrows and 0 <= c < self.ncols):
                raise IndexError(f"entry ({r}, {c}) outside {self.nrows}x{self.ncols}")
            v = _as_fraction(v)
            if v:
                clean[r, c] = v
        object.__setattr__(self, "data", clean)

    @classmethod
    def from_entries(cls, nrows: int, ncols: int, entries: Iterable) -> "SparseMatrix":
        data: dict = {}
        for r, c, v in entries:
            if (r, c) in data:
                raise ValueError(f"duplicate entry at ({r}, {c})")
            data[r, c] = v
        return cls(nrows, ncols, data)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        data = {(i, j): v for i, row in enumerate(rows) for j, v in enumerate(row) if v}
        return cls(nrows, ncols, data)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseMatrix":
        return cls(nrows, ncols, {})

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def nnz(self) -> int:
        return len(self.data)

    @property
    def entries(self) -> list[tuple[int, int, Fraction]]:
        """Row-major list of ``(row, col, value)``."""
        return [(r, c, self.data[r, c]) for r, c in sorted(self.data)]

    def __getitem__(self, rc) -> Fraction:
        return self.data.get(rc, Fraction(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self):
        return hash((self.shape, tuple(self.entries)))

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.ncols, self.nrows, {(c, r): v for (r, c), v in self.data.items()})

    T = property(transpose)

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for (r, c), v in self.data.items():
            out[r][c] = v
        return out

    def rows(self) -> list[dict]:
        out: list[dict] = [dict() for _ in range(self.nrows)]
        for (r, c), v in self.data.items():
            out[r][c] = v
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        right = other.rows()
        acc: dict = {}
        for (r, k), v in self.data.items():
            for c, w in right[k].items():
                acc[r, c] = acc.get((r, c), 0) + v * w
        return SparseMatrix(self.nrows, other.ncols, acc)

    def apply(self, vec: Sequence) -> list[Fraction]:
        out = [Fraction(0)] * self.nrows
        for (r, c), v in self.data.items():
            out[r] += v * vec[c]
        return out


@dataclass(frozen=True)
class RankResult:
    value: int
    mode: str
    primes: tuple[int, ...] = ()

    def __int__(self):
        return self.value


# --- row-level kernels -----------------------------------------------------
# Rows are plain dicts {col: value}; these are what the cohomology engine feeds
# in directly, without building SparseMatrix objects.


def integer_rows(rows: Iterable[dict]) -> list[dict]:
    """Scale each rational row to a primitive integer row (rank-preserving)."""
    out = []
    for row in rows:
        if not row:
            continue
        den = 1
        for v in row.values():
            if isinstance(v, Fraction):
                den = lcm(den, v.denominator)
        irow = {c: int(v * den) for c, v in row.items() if v}
        g = 0
        for v in irow.values():
            g = gcd(g, v)
        if g > 1:
            irow = {c: v // g for c, v in irow.items()}
        if irow:
            out.append(irow)
    return out


def reduce_rows_mod(rows: Iterable[dict], p: int) -> list[dict]:
    out = []
    for row in rows:
        red = {}
        for c, v in row.items():
            if isinstance(v, Fraction):
                if v.denominator % p == 0:
                    raise BadPrimeError(p)
                v = v.numerator * pow(v.denominator, -1, p)
            v %= p
            if v:
                red[c] = v
        if red:
            out.append(red)
    return out


def _markowitz_setup(rows: list[dict]):
    cols: dict[int, set] = {}
    for i, row in enumerate(rows):
        for c in row:
            cols.setdefault(c, set()).add(i)
    heap = [(len(row), i) for i, row in enumerate(rows) if row]
    heapq.heapify(heap)
    return cols, heap


def _pop_pivot_row(rows, heap, done):
    while heap:
        n, i = heapq.heappop(heap)
        if i in done or not rows[i]:
            continue
        if n != len(rows[i]):
            heapq.heappush(heap, (len(rows[i]), i))
            continue
        return i
    return None


def rank_mod_rows(rows: Iterable[dict], p: int) -> int:
    """Rank of integer rows modulo ``p`` (rows already reduced mod p)."""
    rows = [dict(r) for r in rows if r]
    cols, heap = _markowitz_setup(rows)
    done: set[int] = set()
    rank = 0
    while True:
        i = _pop_pivot_row(rows, heap, done)
        if i is None:
            break
        prow = rows[i]
        done.add(i)
        # pivot column: the one shared with fewest other active rows
        pc = min(prow, key=lambda c: len(cols[c]))
        inv = pow(prow[pc], -1, p)
        rank += 1
        for c in prow:
            cols[c].discard(i)
        for j in list(cols[pc]):
            row = rows[j]
            f = row[pc] * inv % p
            for c, v in prow.items():
                nv = (row.get(c, 0) - f * v) % p
                if nv:
                    if c not in row:
                        cols[c].add(j)
                    row[c] = nv
                elif c in row:
                    del row[c]
                    cols[c].discard(j)
            heapq.heappush(heap, (len(row), j))
        rows[i] = {}
    return rank


def rank_int_rows(rows: Iterable[dict]) -> int:
    """Exact rank of integer rows by fraction-free elimination."""
    rows = [dict(r) for r in rows if r]
    cols, heap = _markowitz_setup(rows)
    done: set[int] = set()
    rank = 0
    while True:
        i = _pop_pivot_row(rows, heap, done)
        if i is None:
            break
        prow = rows[i]
        done.add(i)
        pc = min(prow, key=lambda c: (len(cols[c]), abs(prow[c])))
        a = prow[pc]
        rank += 1
        for c in prow:
            cols[c].discard(i)
        for j in list(cols[pc]):
            row = rows[j]
            b = row[pc]
            g = gcd(a, b)
            sa, sb = a // g, b // g
            new = {c: v * sa for c, v in row.items()}
            for c, v in prow.items():
                new[c] = new.get(c, 0) - sb * v
            content = 0
            for v in new.values():
                if v:
                    content = gcd(content, v)
            if content > 1:
                new = {c: v // content for c, v in new.items() if v}
            else:
                new = {c: v for c, v in new.items() if v}
            for c in row:
                if c not in new:
                    cols[c].discard(j)
            for c in new:
                if c not in row:
                    cols[c].add(j)
            rows[j] = new
            heapq.heappush(heap, (len(new), j))
        rows[i] = {}
    return rank


# --- primes ----------------------------------------------------------------


class PrimeSource:
    """Deterministic stream of random primes in [2^61, 2^62)."""

    def __init__(self, seed: int = DEFAULT_SEED):
        self.seed = seed
        self._rng = random.Random(seed)

    def draw(self, exclude: Iterable[int] = ()) -> int:
        exclude = set(exclude)
        while True:
            start = self._rng.randrange(1 << 61, (1 << 62) - (1 << 20))
            p = nextprime(start)
            if p < (1 << 62) and p not in exclude:
                return int(p)

    def pair(self) -> tuple[int, int]:
        p = self.draw()
        return p, self.draw(exclude=[p])


def default_primes(seed: int = DEFAULT_SEED) -> tuple[int, int]:
    return PrimeSource(seed).pair()


# --- public API ------------------------------------------------------------


def rank(M: SparseMatrix, mode: str = "exact", primes: Sequence[int] | None = None) -> RankResult:
    """Rank of ``M``.

    ``mode="exact"`` gives the rank over Q.  ``mode="modular"`` returns the
    maximum of the ranks modulo each prime in ``primes``; this is a lower bound
    for the rational rank, equal to it for all but finitely many primes.
    Raises :class:`BadPrimeError` if a prime divides an entry's denominator.
    """
    rows = [r for r in M.rows() if r]
    if mode == "exact":
        return RankResult(rank_int_rows(integer_rows(rows)), "exact")
    if mode == "modular":
        if not primes:
            primes = default_primes()
        value = max(rank_mod_rows(reduce_rows_mod(rows, p), p) for p in primes)
        return RankResult(value, "modular", tuple(primes))
    raise ValueError(f"unknown rank mode {mode!r}")


@dataclass
class RankPolicy:
    """How ranks feeding a cohomology computation are certified.

    ``modular``: two primes must agree.  ``exact``: exact only (refused above
    the size threshold).  ``auto``: two primes, plus exact when the matrix has
    fewer than ``exact_threshold`` nonzero entries.
    """

    mode: str = "auto"
    seed: int = DEFAULT_SEED
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD
    primes: tuple[int, ...] = ()
    stats: dict = field(default_factory=lambda: {"matrices": 0, "exact": 0, "modular": 0})

    def __post_init__(self):
        if self.mode not in ("auto", "exact", "modular"):
            raise ValueError(f"unknown rank mode {self.mode!r}")
        if not self.primes:
            self.primes = default_primes(self.seed)
        if len(set(self.primes)) < 2 and self.mode != "exact":
            raise ValueError("modular certification needs two distinct primes")

    def describe(self) -> dict:
        return {"mode": self.mode, "seed": self.seed, "primes": list(self.primes),
                "exact_threshold": self.exact_threshold}


class MatrixTooLargeError(ValueError):
    pass


def certified_rank_rows(rows: list[dict], policy: RankPolicy) -> int:
    """Rank of integer rows under ``policy``; raises on any disagreement."""
    rows = [r for r in rows if r]
    if not rows:
        return 0
    nnz = sum(len(r) for r in rows)
    policy.stats["matrices"] += 1
    values = {}
    if policy.mode in ("auto", "modular"):
        for p in policy.primes[:2]:
            values[p] = rank_mod_rows(reduce_rows_mod(rows, p), p)
        policy.stats["modular"] += 1
    if policy.mode == "exact" and nnz >= policy.exact_threshold:
        raise MatrixTooLargeError(
            f"exact mode refused: {nnz} nonzero entries >= threshold {policy.exact_threshold}")
    if policy.mode == "exact" or (policy.mode == "auto" and nnz < policy.exact_threshold):
        values["exact"] = rank_int_rows(integer_rows(rows))
        policy.stats["exact"] += 1
    distinct = set(values.values())
    if len(distinct) != 1:
        raise RankMismatchError(f"rank disagreement across certification routes: {values}")
    return distinct.pop()


def certified_rank(M: SparseMatrix, policy: RankPolicy | None = None) -> int:
    return certified_rank_rows(M.rows(), policy or RankPolicy())


def rref(M: SparseMatrix) -> tuple[list[dict], list[int]]:
    """Reduced row echelon form over Q: (pivot rows, pivot columns), ordered by pivot column."""
    pivots: dict[int, dict] = {}
    for row in M.rows():
        row = dict(row)
        # eliminate existing pivots in increasing column order
        while row:
            hits = [c for c in row if c in pivots]
            if not hits:
                break
            for c in hits:
                if c in row:
                    f = row[c]
                    for cc, v in pivots[c].items():
                        nv = row.get(cc, 0) - f * v
                        if nv:
                            row[cc] = nv
                        else:
                            row.pop(cc, None)
        if not row:
            continue
        pc = min(row)
        inv = 1 / row[pc]
        row = {c: v * inv for c, v in row.items()}
        for c, prow in pivots.items():
            if pc in prow:
                f = prow[pc]
                for cc, v in row.items():
                    nv = prow.get(cc, 0) - f * v
                    if nv:
                        prow[cc] = nv
                    else:
                        prow.pop(cc, None)
        pivots[pc] = row
    order = sorted(pivots)
    return [pivots[c] for c in order], order


def kernel_basis(M: SparseMatrix) -> list[list[Fraction]]:
    """Basis of the right null space over Q.

    One vector per non-pivot column; each is scaled so that its first nonzero
    coordinate equals 1.
    """
    prows, pcols = rref(M)
    pset = set(pcols)
    basis = []
    for f in range(M.ncols):
        if f in pset:
            continue
        vec = [Fraction(0)] * M.ncols
        vec[f] = Fraction(1)
        for pc, prow in zip(pcols, prows):
            v = prow.get(f)
            if v:
                vec[pc] = -v
        lead = next(v for v in vec if v)
        basis.append([v / lead for v in vec])
    return basis
