"""Constrained spin-1 PXP-type chains: bases, Hamiltonians, fragmentation, FSA and quenches."""

__version__ = "0.1.0"

from .basis import (FREE, MODEL_I, MODEL_II, MODEL_III, PXP_SPIN1, PRESETS, Boundary, ConstrainedBasis,
                    ConstraintSet, count_dimension, enumerate_basis, preset)
from .dynamics import Method, QuenchResult, evolve, evolve_z2
from .errors import ConstrainedPXPError
from .fragmentation import FragmentDecomposition, decompose, enumerate_inert
from .fsa import FsaRun, forward_scatter, split_hamiltonian, z2_vector
from .hamiltonian import SparseOperator, build_hamiltonian, build_sector_hamiltonian
from .reports import EigenReport, sector_eigenreport
from .spectral import EigenSystem, build_special_state, diagonalize, entanglement_entropy
from .symmetry import SymmetrySector, build_sector

__all__ = [
    "FREE", "MODEL_I", "MODEL_II", "MODEL_III", "PXP_SPIN1", "PRESETS", "Boundary", "ConstrainedBasis",
    "ConstraintSet", "count_dimension", "enumerate_basis", "preset", "Method", "QuenchResult", "evolve",
    "evolve_z2", "ConstrainedPXPError", "FragmentDecomposition", "decompose", "enumerate_inert", "FsaRun",
    "forward_scatter", "split_hamiltonian", "z2_vector", "SparseOperator", "build_hamiltonian",
    "build_sector_hamiltonian", "EigenReport", "sector_eigenreport", "EigenSystem", "build_special_state",
    "diagonalize", "entanglement_entropy", "SymmetrySector", "build_sector",
]
