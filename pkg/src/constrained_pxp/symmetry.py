"""Translation/inversion sectors and the particle-hole operator.

Translation ``T`` moves every site one step to the right, ``(T c)_i = c_{i-1}``.
A momentum-``k`` sector state built on representative ``r`` is

    |r; k, p> = N * sum_t exp(-2j*pi*k*t/L) T^t (1 + p I) |r>

with ``I`` the reflection ``i -> (offset - i) mod L`` (default offset ``L-1``:
bond-centred for even ``L``, site-centred for odd ``L``).  Inversion is only
resolved for ``k = 0`` and ``k = L/2`` where it commutes with the momentum
projector.  The representative of an orbit is its smallest code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import ZERO, Boundary, ConstrainedBasis, codes_of, code_to_string
from .errors import DimensionMismatch, RequiresPBC
from .hamiltonian import SparseOperator


def translate_codes(codes: np.ndarray, L: int, steps: int = 1) -> np.ndarray:
    """Codes of ``T^steps c``."""
    codes = np.asarray(codes, dtype=np.int64)
    steps %= L
    if steps == 0:
        return codes.copy()
    high = np.int64(3 ** (L - steps))
    return (codes % high) * np.int64(3**steps) + codes // high


def reflect_codes(basis: ConstrainedBasis, offset: int | None = None) -> np.ndarray:
    L = basis.L
    offset = L - 1 if offset is None else offset
    src = (offset - np.arange(L)) % L
    return codes_of(basis.digits[:, src])


@dataclass(frozen=True, eq=False)
class SymmetrySector:
    """Orthonormal symmetry-adapted states and the isometry lifting them to the parent basis.

    ``lift`` is a ``(parent.dim, dim)`` sparse matrix whose columns are the
    sector states in the parent basis.
    """

    parent: ConstrainedBasis
    k: int
    inversion: int | None
    representatives: np.ndarray
    norms: np.ndarray
    lift: sp.csc_matrix

    @property
    def dim(self) -> int:
        return int(self.representatives.size)

    @property
    def is_real(self) -> bool:
        return self.k % self.parent.L == 0 or 2 * self.k == self.parent.L

    def lift_vectors(self, vectors: np.ndarray) -> np.ndarray:
        """Map sector coefficient vectors (columns) to the parent basis."""
        return self.lift @ vectors

    def project(self, vectors: np.ndarray) -> np.ndarray:
        return self.lift.conj().T @ vectors

    def representative_strings(self) -> list[str]:
        return [code_to_string(int(c), self.parent.L) for c in self.representatives]

    def report(self) -> str:
        inv = "NONE" if self.inversion is None else f"{self.inversion:+d}"
        lines = [f"# k={self.k} I={inv} dim={self.dim}"]
        lines += [f"{s} {w:.17g}" for s, w in zip(self.representative_strings(), self.norms)]
        return "\n".join(lines) + "\n"


def build_sector(basis: ConstrainedBasis, k: int, inversion: int | None = None,
                 reflection_offset: int | None = None) -> SymmetrySector:
    """Build the ``(k, inversion)`` sector of a periodic basis."""
    if basis.boundary is not Boundary.PBC:
        raise RequiresPBC("momentum sectors need periodic boundaries")
    L = basis.L
    k %= L
    real = k == 0 or 2 * k == L
    if inversion is not None:
        if inversion not in (1, -1):
            raise ValueError("inversion must be +1, -1 or None")
        if not real:
            raise ValueError("inversion is only resolved together with k = 0 or k = L/2")

    images = [basis.codes]
    for s in range(1, L):
        images.append(translate_codes(basis.codes, L, s))
    if inversion is not None:
        reflected = reflect_codes(basis, reflection_offset)
        images += [translate_codes(reflected, L, s) for s in range(L)]
    reps = images[0].copy()
    for img in images[1:]:
        np.minimum(reps, img, out=reps)

    phases = np.exp(2j * np.pi * k * np.arange(L) / L)
    if real:
        phases = phases.real.round()
    coef = np.zeros(basis.dim, dtype=phases.dtype)
    for s in range(L):
        coef += np.where(images[s] == reps, phases[s], 0)
        if inversion is not None:
            coef += inversion * np.where(images[L + s] == reps, phases[s], 0)

    uniq, column = np.unique(reps, return_inverse=True)
    norm2 = np.bincount(column, weights=np.abs(coef) ** 2, minlength=uniq.size)
    keep = norm2 > 1e-12
    new_index = np.cumsum(keep) - 1
    member = keep[column]
    rows = np.flatnonzero(member)
    cols = new_index[column[member]]
    norms = np.sqrt(norm2[keep])
    data = coef[member] / norms[cols]
    lift = sp.csc_matrix((data, (rows, cols)), shape=(basis.dim, int(keep.sum())))
    return SymmetrySector(basis, k, inversion, uniq[keep], norms, lift)


def particle_hole_signs(basis: ConstrainedBasis) -> np.ndarray:
    """Diagonal of ``C = prod_i (2 (S^z_i)^2 - 1)``: ``(-1)**(number of |0> sites)``."""
    zeros = (basis.digits == ZERO).sum(axis=1)
    return np.where(zeros % 2 == 0, 1.0, -1.0)


def apply_particle_hole(basis: ConstrainedBasis, vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector)
    if vector.shape[0] != basis.dim:
        raise DimensionMismatch(f"vector has length {vector.shape[0]}, basis has {basis.dim}")
    signs = particle_hole_signs(basis)
    return signs.reshape((-1,) + (1,) * (vector.ndim - 1)) * vector


def verify_anticommutation(H: "SparseOperator | sp.spmatrix", basis: ConstrainedBasis) -> float:
    """Largest entry of ``HC + CH``; zero when ``CHC = -H`` holds entrywise."""
    M = H.matrix if isinstance(H, SparseOperator) else sp.csr_matrix(H)
    C = sp.diags(particle_hole_signs(basis))
    A = (M @ C + C @ M).tocsr()
    A.eliminate_zeros()
    return float(abs(A).max()) if A.nnz else 0.0
