"""Exact cohomology of SL2-equivariant instanton bundles and Ulrich ranks of Veronese varieties."""

__version__ = "0.1.0"

from .cech import CohomologyTable, fast_path_two_row, hypercohomology, table
from .exactalg import RankPolicy, SparseMatrix, kernel_basis, rank
from .instanton import (build_resolution, e_complex, ee_complex, instanton_axioms,
                        moduli_dimension_check, verify_coh0, verify_exactness, verify_lepotier)
from .psheaf import FreeComplex, FreeSheaf, Poly, PolyMatrix, line_cohomology
from .sl2 import RepDecomposition, clebsch_gordan, equivariant_maps, sym_power_decomposition
from .ulrich import (check_ulrich, decompose_d, natural_cohomology, rank_divisibility,
                     ulrich_hilbert, ulrich_twists, ur_set)

__all__ = [
    "CohomologyTable", "FreeComplex", "FreeSheaf", "Poly", "PolyMatrix", "RankPolicy",
    "RepDecomposition", "SparseMatrix", "build_resolution", "check_ulrich", "clebsch_gordan",
    "decompose_d", "e_complex", "ee_complex", "equivariant_maps", "fast_path_two_row",
    "hypercohomology", "instanton_axioms", "kernel_basis", "line_cohomology",
    "moduli_dimension_check", "natural_cohomology", "rank", "rank_divisibility",
    "sym_power_decomposition", "table", "ulrich_hilbert", "ulrich_twists", "ur_set",
    "verify_coh0", "verify_exactness", "verify_lepotier",
]
