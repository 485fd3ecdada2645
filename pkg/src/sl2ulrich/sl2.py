"""SL2 representation arithmetic and equivariant polynomial matrices.

Fixed conventions: V_p has weight basis v_0..v_p with

    f v_i = v_{i+1},   e v_i = i (p + 1 - i) v_{i-1},   h v_i = (p - 2i) v_i,

and the coordinates x_0..x_3 of P^3 = P(V_3) form the dual weight basis of
V_3^*, so x_i has h-weight 2i - 3.  SL2 acts on polynomials by derivations.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, combinations_with_replacement

from .exactalg import SparseMatrix, kernel_basis
from .psheaf import FreeSheaf, Poly, PolyMatrix, monomial_index, monomials

GENERATORS = ("e", "f", "h")


@dataclass(frozen=True)
class Irrep:
    weight: int

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("weight must be nonnegative")

    @property
    def dim(self) -> int:
        return self.weight + 1


@dataclass(frozen=True)
class RepDecomposition:
    """Multiset of irreducible weights, stored in descending order."""

    weights: tuple = ()

    def __post_init__(self):
        ws = tuple(sorted((int(w) for w in self.weights), reverse=True))
        if any(w < 0 for w in ws):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", ws)

    @classmethod
    def irrep(cls, p: int) -> "RepDecomposition":
        return cls((p,))

    @property
    def dim(self) -> int:
        return sum(w + 1 for w in self.weights)

    def multiplicity(self, p: int) -> int:
        return self.weights.count(p)

    def multiplicities(self) -> dict[int, int]:
        return dict(Counter(self.weights))

    def __add__(self, other: "RepDecomposition") -> "RepDecomposition":
        return RepDecomposition(self.weights + other.weights)

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)

    def basis_weights(self) -> tuple[int, ...]:
        """h-weights of the concatenated weight bases, in block order."""
        return tuple(p - 2 * i for p in self.weights for i in range(p + 1))

    def __str__(self):
        return " + ".join(f"V_{w}" for w in self.weights) or "0"


@dataclass(frozen=True)
class GeneratorAction:
    weight: int
    e: SparseMatrix
    f: SparseMatrix
    h: SparseMatrix

    def __getitem__(self, name: str) -> SparseMatrix:
        return getattr(self, name)


@lru_cache(maxsize=None)
def generator_action(p: int) -> GeneratorAction:
    if p < 0:
        raise ValueError("weight must be nonnegative")
    n = p + 1
    e = {(i - 1, i): i * (p + 1 - i) for i in range(1, n)}
    f = {(i + 1, i): 1 for i in range(p)}
    h = {(i, i): p - 2 * i for i in range(n)}
    return GeneratorAction(p, SparseMatrix(n, n, e), SparseMatrix(n, n, f), SparseMatrix(n, n, h))


def block_action(rep: RepDecomposition, name: str) -> SparseMatrix:
    """Action of generator ``name`` on the direct sum, block-diagonal in ``rep`` order."""
    data, off = {}, 0
    for p in rep.weights:
        for (r, c), v in generator_action(p)[name].data.items():
            data[r + off, c + off] = v
        off += p + 1
    return SparseMatrix(off, off, data)


def clebsch_gordan(a: int, b: int) -> RepDecomposition:
    if a < 0 or b < 0:
        raise ValueError("weights must be nonnegative")
    return RepDecomposition(tuple(range(a + b, abs(a - b) - 1, -2)))


def tensor_labels(A: RepDecomposition, B: RepDecomposition) -> RepDecomposition:
    ws: list[int] = []
    for a in A.weights:
        for b in B.weights:
            ws.extend(clebsch_gordan(a, b).weights)
    return RepDecomposition(tuple(ws))


def decompose_weight_counts(counts: Counter) -> RepDecomposition:
    """Peel highest weights off a character given as ``{weight: multiplicity}``."""
    counts = Counter({w: n for w, n in counts.items() if n})
    out = []
    while counts:
        top = max(counts)
        n = counts[top]
        if n < 0 or top < 0:
            raise ValueError("not the character of a representation")
        out.extend([top] * n)
        for w in range(top, -top - 1, -2):
            counts[w] -= n
            if counts[w] == 0:
                del counts[w]
            elif counts[w] < 0:
                raise ValueError("not the character of a representation")
    return RepDecomposition(tuple(out))


def sym_power_decomposition(p: int, k: int) -> RepDecomposition:
    """Sym^k V_p by enumerating weights of monomials in the weight basis."""
    if p < 0 or k < 0:
        raise ValueError("arguments must be nonnegative")
    wts = [p - 2 * i for i in range(p + 1)]
    counts = Counter(sum(c) for c in combinations_with_replacement(wts, k))
    return decompose_weight_counts(counts)


def exterior_power_decomposition(p: int, k: int) -> RepDecomposition:
    wts = [p - 2 * i for i in range(p + 1)]
    counts = Counter(sum(c) for c in combinations(wts, k))
    return decompose_weight_counts(counts)


# --- action on polynomials -------------------------------------------------


def coordinate_weight(i: int) -> int:
    return 2 * i - 3


def monomial_weight(m) -> int:
    return -3 * m[0] - m[1] + m[2] + 3 * m[3]


@lru_cache(maxsize=None)
def _coordinate_images(name: str) -> tuple[dict, ...]:
    # X . x_i = -sum_j X[i, j] x_j  (contragredient action on V_3^*)
    X = generator_action(3)[name]
    images = []
    for i in range(4):
        images.append({j: -v for (r, j), v in X.data.items() if r == i})
    return tuple(images)


def derivation(name: str, g: Poly) -> Poly:
    """Action of generator ``name`` on a polynomial (as a derivation)."""
    out: dict = {}
    images = _coordinate_images(name)
    for m, c in g.terms.items():
        for i in range(4):
            if not m[i]:
                continue
            for j, v in images[i].items():
                e = list(m)
                e[i] -= 1
                e[j] += 1
                key = tuple(e)
                out[key] = out.get(key, 0) + c * m[i] * v
    return Poly(out, g.degree)


@lru_cache(maxsize=None)
def derivation_matrix(name: str, degree: int) -> dict:
    """``{(target monomial index, source monomial index): coeff}`` on degree-``degree`` forms."""
    idx = monomial_index(degree)
    data: dict = {}
    for s, m in enumerate(monomials(degree)):
        for mm, c in derivation(name, Poly({m: 1})).terms.items():
            data[idx[mm], s] = c
    return data


def intertwining_system(source: RepDecomposition, target: RepDecomposition,
                        entry_degree: int) -> SparseMatrix:
    """Linear constraints on the coefficients of a target x source matrix of forms.

    Unknowns are ordered row-major by (row, column, monomial).  A solution A
    satisfies  X_t A - A X_s + X(A) = 0  for X in {e, f, h}.
    """
    nr, nc = target.dim, source.dim
    mons = monomials(entry_degree)
    nm = len(mons)

    def var(i, j, mu):
        return (i * nc + j) * nm + mu

    rows: list[dict] = []
    for name in GENERATORS:
        Xt, Xs = block_action(target, name).rows(), block_action(source, name).transpose().rows()
        D = derivation_matrix(name, entry_degree)
        D_by_target: dict = {}
        for (mt, ms), v in D.items():
            D_by_target.setdefault(mt, []).append((ms, v))
        for i in range(nr):
            for j in range(nc):
                for mu in range(nm):
                    row: dict = {}
                    for k, v in Xt[i].items():
                        key = var(k, j, mu)
                        row[key] = row.get(key, 0) + v
                    for k, v in Xs[j].items():  # (A X_s)_{ij} = sum_k A_ik X_s[k, j]
                        key = var(i, k, mu)
                        row[key] = row.get(key, 0) - v
                    for ms, v in D_by_target.get(mu, ()):
                        key = var(i, j, ms)
                        row[key] = row.get(key, 0) + v
                    row = {k: v for k, v in row.items() if v}
                    if row:
                        rows.append(row)
    data = {(r, c): v for r, row in enumerate(rows) for c, v in row.items()}
    return SparseMatrix(len(rows), nr * nc * nm, data)


def coefficients_to_matrix(vec, source: FreeSheaf, target: FreeSheaf,
                           entry_degree: int) -> PolyMatrix:
    mons = monomials(entry_degree)
    nm, nc = len(mons), source.rank
    entries: dict = {}
    for k, v in enumerate(vec):
        if v:
            ij, mu = divmod(k, nm)
            i, j = divmod(ij, nc)
            entries.setdefault((i, j), {})[mons[mu]] = v
    return PolyMatrix(source, target, {ij: Poly(t, entry_degree) for ij, t in entries.items()})


def rep_sheaf(rep: RepDecomposition, twist: int) -> FreeSheaf:
    return FreeSheaf.uniform(twist, rep.dim, rep.basis_weights(), rep)


def equivariant_maps(source: RepDecomposition, target: RepDecomposition, entry_degree: int,
                     source_twist: int | None = None, target_twist: int = 0) -> list[PolyMatrix]:
    """Basis of SL2-equivariant maps ``source ⊗ O(-deg) -> target ⊗ O`` with entries of ``entry_degree``.

    Each basis element has its first nonzero coefficient (row-major over
    row, column, monomial) equal to 1.
    """
    if source_twist is None:
        source_twist = target_twist - entry_degree
    if target_twist - source_twist != entry_degree:
        raise ValueError("twists inconsistent with entry degree")
    system = intertwining_system(source, target, entry_degree)
    src, tgt = rep_sheaf(source, source_twist), rep_sheaf(target, target_twist)
    return [coefficients_to_matrix(v, src, tgt, entry_degree) for v in kernel_basis(system)]


def equivariance_defect(A: PolyMatrix, source: RepDecomposition,
                        target: RepDecomposition) -> dict[str, bool]:
    """For each generator, whether X_t A - A X_s + X(A) vanishes identically."""
    out = {}
    for name in GENERATORS:
        Xt, Xs = block_action(target, name), block_action(source, name)
        acc: dict = {}
        for (i, j), g in A.entries.items():
            d = derivation(name, g)
            if d:
                acc[i, j] = acc.get((i, j), Poly()) + d
            for (k, jj), v in Xs.data.items():  # -A X_s: column jj gets -A[i, k] X_s[k, jj]
                if k == j:
                    acc[i, jj] = acc.get((i, jj), Poly()) - g * v
            for (ii, k), v in Xt.data.items():
                if k == i:
                    acc[ii, j] = acc.get((ii, j), Poly()) + g * v
        out[name] = all(p.is_zero() for p in acc.values())
    return out


__all__ = [
    "GeneratorAction", "Irrep", "RepDecomposition", "block_action", "clebsch_gordan",
    "coordinate_weight", "derivation", "equivariance_defect", "equivariant_maps",
    "exterior_power_decomposition", "generator_action", "intertwining_system",
    "monomial_weight", "rep_sheaf", "sym_power_decomposition", "tensor_labels",
]
