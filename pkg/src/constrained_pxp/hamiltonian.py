"""Projected Hamiltonians ``H = sum_i P S^x_i P`` and model-specific conserved operators.

Every basis state already satisfies the constraint, so sandwiching by the
projector reduces to keeping only those single-site flips whose result is
again a basis member.  ``S^x`` couples ``|0>`` to ``|+>`` and ``|->`` with
amplitude ``1/sqrt(2)``; the overall sign is ``+``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .basis import MINUS, PLUS, ZERO, Boundary, ConstrainedBasis, decode_string
from .errors import FlipLeavesBasis, RequiresRealSector

AMPLITUDE = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Real operator on a basis, stored in CSR form without explicit zeros."""

    matrix: sp.csr_matrix
    hermitian: bool = True

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix)
        m.eliminate_zeros()
        m.sort_indices()
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        return self.matrix @ other

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def is_symmetric(self, tol: float = 1e-15) -> bool:
        diff = self.matrix - self.matrix.T
        return diff.nnz == 0 or float(abs(diff).max()) <= tol

    def export(self, path: "str | Path") -> None:
        """Write ``row col value`` triplets after a header line."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        lines = [f"# dim={self.dim} hermitian={str(self.hermitian).lower()} nnz={coo.nnz}"]
        lines += [f"{r} {c} {v:.17g}" for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order])]
        Path(path).write_text("\n".join(lines) + "\n")


def _flip_targets(old: int) -> tuple[int, ...]:
    return (MINUS, PLUS) if old == ZERO else (ZERO,)


def single_site_flips(basis: ConstrainedBasis, site: int, old: int, new: int):
    """Rows holding ``old`` at ``site`` whose flip to ``new`` stays in the basis.

    Returns ``(rows, cols)`` index arrays.
    """
    rows = np.flatnonzero(basis.digits[:, site] == old)
    if rows.size == 0:
        return rows, rows
    shift = np.int64(new - old) * np.int64(3**site)
    cols = basis.lookup(basis.codes[rows] + shift)
    keep = cols >= 0
    return rows[keep], cols[keep]


def build_hamiltonian(basis: ConstrainedBasis) -> SparseOperator:
    """Assemble ``H = sum_i P S^x_i P`` on ``basis``."""
    rows, cols = [], []
    for site in range(basis.L):
        for old in (MINUS, ZERO, PLUS):
            for new in _flip_targets(old):
                r, c = single_site_flips(basis, site, old, new)
                rows.append(r)
                cols.append(c)
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    data = np.full(rows.size, AMPLITUDE)
    H = sp.csr_matrix((data, (cols, rows)), shape=(basis.dim, basis.dim))
    return SparseOperator(H, hermitian=True)


def motif_counts(basis: ConstrainedBasis, motif: str) -> np.ndarray:
    """Occurrences of a contiguous motif in every basis state (wrapping under PBC)."""
    pattern = decode_string(motif)
    L, m = basis.L, len(pattern)
    if m == 0:
        raise ValueError("empty motif")
    digits = basis.digits
    if basis.boundary is Boundary.PBC:
        if m > L:
            return np.zeros(basis.dim, dtype=np.int64)
        starts = range(L)
    else:
        starts = range(L - m + 1)
    counts = np.zeros(basis.dim, dtype=np.int64)
    for s in starts:
        hit = np.ones(basis.dim, dtype=bool)
        for k, d in enumerate(pattern):
            hit &= digits[:, (s + k) % L] == d
        counts += hit
    return counts


def motif_projector(basis: ConstrainedBasis, motif: str) -> SparseOperator:
    return SparseOperator(sp.diags(motif_counts(basis, motif).astype(float), format="csr"))


def conserved_Npp(basis: ConstrainedBasis) -> SparseOperator:
    """Number of adjacent ``++`` pairs; conserved by Model-I."""
    return motif_projector(basis, "++")


def conserved_Oi(basis: ConstrainedBasis, site: int) -> SparseOperator:
    """Swap ``|+> <-> |->`` at ``site`` and fix ``|0>``; conserved by Model-II."""
    d = basis.digits[:, site].astype(np.int64)
    # MINUS -> PLUS is +2 at this digit, PLUS -> MINUS is -2
    shift = np.select([d == MINUS, d == PLUS], [2, -2], 0) * np.int64(3**site)
    cols = basis.lookup(basis.codes + shift)
    if np.any(cols < 0):
        bad = basis.state_string(int(np.flatnonzero(cols < 0)[0]))
        raise FlipLeavesBasis(f"O_{site} maps {bad} outside the {basis.constraint.name} basis")
    O = sp.csr_matrix((np.ones(basis.dim), (np.arange(basis.dim), cols)), shape=(basis.dim, basis.dim))
    return SparseOperator(O)


def commutator_max(A, B) -> float:
    """Largest absolute entry of ``AB - BA``."""
    A = A.matrix if isinstance(A, SparseOperator) else sp.csr_matrix(A)
    B = B.matrix if isinstance(B, SparseOperator) else sp.csr_matrix(B)
    C = A @ B - B @ A
    C.eliminate_zeros()
    return float(abs(C).max()) if C.nnz else 0.0


def local_projector_sum(basis: ConstrainedBasis, motif: str = "++") -> SparseOperator:
    """Site average of a diagonal motif projector; ``"++"`` gives the quench observable."""
    counts = motif_counts(basis, motif)
    n_positions = basis.L if basis.boundary is Boundary.PBC else basis.L - len(motif) + 1
    return SparseOperator(sp.diags(counts / max(n_positions, 1), format="csr"))


def build_sector_hamiltonian(sector, H: SparseOperator | None = None) -> SparseOperator:
    """Restrict ``H`` to a real symmetry sector (``k = 0`` or ``k = L/2``).

    ``H`` defaults to the parent-basis Hamiltonian; pass it in when building
    several sectors of the same basis.
    """
    if not sector.is_real:
        raise RequiresRealSector(f"k={sector.k} gives a complex sector Hamiltonian")
    if H is None:
        H = build_hamiltonian(sector.parent)
    U = sector.lift
    Hs = (U.conj().T @ (H.matrix @ U)).real
    Hs = sp.csr_matrix(Hs)
    Hs.data[np.abs(Hs.data) < 1e-13] = 0.0
    Hs = (Hs + Hs.T) / 2
    return SparseOperator(Hs)
