"""Ulrich arithmetic on Veronese varieties and Ulrich certificates from cohomology tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, gcd, prod
from typing import Iterable

from .cech import CohomologyTable


@dataclass(frozen=True)
class VeroneseParams:
    n: int
    d: int

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")

    @property
    def ambient_dim(self) -> int:
        return comb(self.n + self.d, self.n) - 1


@dataclass(frozen=True)
class RankConstraint:
    """Every Ulrich rank is a multiple of ``modulus``; rank 1 possibly excluded.

    ``complete`` says whether the constraint is known to describe the set of
    Ulrich ranks exactly (``None`` when unknown).
    """

    modulus: int
    exclude_rank_one: bool
    complete: bool | None = True

    def admits(self, r: int) -> bool:
        return r >= 1 and r % self.modulus == 0 and not (self.exclude_rank_one and r == 1)

    def describe(self) -> str:
        base = "N*" if self.modulus == 1 else f"{self.modulus}N*"
        if self.exclude_rank_one:
            base += " \\ {1}"
        return base


@dataclass(frozen=True)
class DecompositionDME:
    d: int
    h: int
    e: int

    @property
    def m(self) -> int:
        return 3 * self.h + self.e

    @property
    def k(self) -> int:
        return comb(self.m + 1, 2)

    @property
    def rank3_charge(self) -> int:
        return 4 * self.k


def ulrich_hilbert(n: int, d: int, r: int, t: int) -> Fraction:
    """Hilbert polynomial r/n! * prod_{j=1..n} (dj + t) of a rank-r Ulrich sheaf on X^n_d."""
    if r < 1:
        raise ValueError("rank must be positive")
    return Fraction(r * prod(d * j + t for j in range(1, n + 1)), factorial(n))


def rank_divisibility(n: int, d: int) -> int:
    """Smallest M with M | r forced by n! chi(U(1)) = r prod(dj + 1)."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    nf = factorial(n)
    return nf // gcd(nf, prod(d * j + 1 for j in range(1, n + 1)))


_THREEFOLD = {0: (6, False), 1: (1, True), 5: (1, True), 2: (2, False), 4: (2, False), 3: (3, False)}


def ur_set(d: int) -> RankConstraint:
    """Ulrich ranks of the degree-d Veronese threefold."""
    if d < 2:
        raise ValueError("d must be >= 2")
    modulus, exclude = _THREEFOLD[d % 6]
    if modulus != rank_divisibility(3, d):
        raise AssertionError(f"classification and divisibility disagree at d={d}")
    if exclude != (modulus == 1):
        raise AssertionError(f"rank-one exclusion inconsistent at d={d}")
    return RankConstraint(modulus, exclude, True)


def rank_constraint(n: int, d: int) -> RankConstraint:
    """Best known description of Ur(X^n_d) from the divisibility argument.

    Threefolds use the full classification.  Otherwise the constraint is
    complete when n! divides d; for surfaces and curves the modulus is also
    sharp.  Rank one is excluded whenever the modulus is 1, n >= 2 and d >= 2
    (Picard group Z).
    """
    if n == 3 and d >= 2:
        return ur_set(d)
    M = rank_divisibility(n, d)
    exclude = M == 1 and n >= 2 and d >= 2
    if n <= 2 or d == 1:
        complete: bool | None = True
    else:
        complete = True if d % factorial(n) == 0 else None
    return RankConstraint(M, exclude, complete)


def decompose_d(d: int) -> DecompositionDME:
    if d < 3 or d % 2 == 0:
        raise ValueError(f"d={d}: no equivariant S^2 construction applies (need odd d >= 3)")
    h, rest = divmod(d - 1, 6)
    e = rest // 2
    out = DecompositionDME(d, h, e)
    assert (h, e) != (0, 0) and 6 * h + 2 * e + 1 == d
    assert 2 * out.m + 1 == d and 4 * out.k * 2 == d * d - 1
    return out


def ulrich_twists(d: int) -> tuple[int, int, int]:
    """Twists t at which H*(F(t)) must vanish for F(2d-2) to be Ulrich on X_d."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return (d - 2, -2, -d - 2)


@dataclass
class UlrichCertificate:
    d: int
    twists: tuple
    verdicts: dict = field(default_factory=dict)
    sheaf: str = ""
    provenance: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(not any(h) for h in self.verdicts.values())

    @property
    def failed_twists(self) -> list[int]:
        return [t for t in self.twists if any(self.verdicts[t])]

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "sheaf": self.sheaf,
            "twists": list(self.twists),
            "verdicts": {str(t): {"h": list(h), "vanishes": not any(h)}
                         for t, h in self.verdicts.items()},
            "passed": self.passed,
            "failed_twists": self.failed_twists,
            "ulrich_bundle": f"{self.sheaf}({2 * self.d - 2})" if self.sheaf else None,
            "provenance": self.provenance,
        }


def check_ulrich(tab: CohomologyTable, d: int) -> UlrichCertificate:
    twists = ulrich_twists(d)
    missing = [t for t in twists if t not in tab]
    if missing:
        raise KeyError(f"table lacks twists {missing}")
    cert = UlrichCertificate(d, twists, sheaf=tab.sheaf, provenance=dict(tab.provenance))
    for t in twists:
        cert.verdicts[t] = tuple(tab[t])
    return cert


def natural_cohomology(tab: CohomologyTable, t_range: Iterable[int]) -> tuple[bool, list[int]]:
    """(verdict, twists with more than one nonzero h^i)."""
    ts = list(t_range)
    missing = [t for t in ts if t not in tab]
    if missing:
        raise KeyError(f"table lacks twists {missing}")
    bad = [t for t in ts if sum(1 for x in tab[t] if x) > 1]
    return not bad, bad
