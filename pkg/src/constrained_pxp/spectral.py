"""Diagonalisation, per-eigenstate observables and the exact integer-energy states of Model-I."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .basis import MODEL_I, Boundary, ConstrainedBasis, digits_of, encode_string, enumerate_basis
from .errors import EnergyOutOfRange, LengthTooSmall, TooLargeForFullSpectrum
from .hamiltonian import SparseOperator
from .symmetry import SymmetrySector, translate_codes

DENSE_LIMIT = 12_000
BETA_MAX = 50.0


@dataclass(eq=False)
class EigenSystem:
    """Ascending eigenvalues with eigenvectors stored column-wise."""

    energies: np.ndarray
    vectors: np.ndarray
    space: object = None
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return int(self.energies.size)

    def residuals(self, H) -> np.ndarray:
        M = H.matrix if isinstance(H, SparseOperator) else H
        R = M @ self.vectors - self.vectors * self.energies
        return np.linalg.norm(R, axis=0)

    def orthonormality_error(self) -> float:
        G = self.vectors.T.conj() @ self.vectors
        return float(np.abs(G - np.eye(self.dim)).max()) if self.dim else 0.0

    def degeneracy_groups(self, tol: float = 1e-8) -> np.ndarray:
        """Consecutive eigenvalues closer than ``tol`` share a group id."""
        if self.dim == 0:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([[0], np.cumsum(np.diff(self.energies) > tol)])


def diagonalize(H: "SparseOperator | sp.spmatrix | np.ndarray", space=None,
                dense_limit: int = DENSE_LIMIT, **meta) -> EigenSystem:
    """Full spectrum by a dense symmetric eigensolver."""
    M = H.matrix if isinstance(H, SparseOperator) else H
    n = M.shape[0]
    if n > dense_limit:
        raise TooLargeForFullSpectrum(
            f"dimension {n} exceeds the dense limit {dense_limit}; diagonalise symmetry sectors "
            "or fragments separately (build_sector / decompose)")
    dense = M.toarray() if sp.issparse(M) else np.asarray(M)
    if n == 0:
        return EigenSystem(np.zeros(0), np.zeros((0, 0)), space, meta)
    E, V = np.linalg.eigh(dense)
    return EigenSystem(E, V, space, meta)


def diagonalize_blocks(H, blocks, space=None, **meta) -> list[tuple[np.ndarray, EigenSystem]]:
    """Diagonalise ``H`` restricted to each index block (e.g. fragments)."""
    M = (H.matrix if isinstance(H, SparseOperator) else sp.csr_matrix(H)).tocsr()
    out = []
    for idx in blocks:
        sub = M[idx][:, idx]
        out.append((np.asarray(idx), diagonalize(sub, space, **meta)))
    return out


def _magnetization_per_state(space) -> np.ndarray:
    if isinstance(space, ConstrainedBasis):
        return space.magnetizations.astype(float)
    if isinstance(space, SymmetrySector):
        L = space.parent.L
        return digits_of(space.representatives, L).astype(np.int64).sum(axis=1) - float(L)
    raise TypeError("space must be a ConstrainedBasis or SymmetrySector")


def magnetization(state: np.ndarray, space) -> "float | np.ndarray":
    """``<S_z>`` of a normalised state (or of every column of a matrix)."""
    mz = _magnetization_per_state(space)
    state = np.asarray(state)
    w = np.abs(state) ** 2
    return mz @ w


def _thermal(energies: np.ndarray, values: np.ndarray, beta: float) -> tuple[float, float]:
    shift = energies.min() if beta >= 0 else energies.max()
    w = np.exp(-beta * (energies - shift))
    z = w.sum()
    return float(w @ energies / z), float(w @ values / z)


def gibbs_beta(energies: np.ndarray, target: float, beta_max: float = BETA_MAX,
               tol: float = 1e-10) -> float:
    """Inverse temperature whose canonical mean energy equals ``target`` (bisection)."""
    energies = np.asarray(energies, dtype=float)
    if not energies.min() < target < energies.max():
        raise EnergyOutOfRange(f"E={target} outside ({energies.min()}, {energies.max()})")
    dummy = np.zeros_like(energies)
    lo, hi = -beta_max, beta_max
    if _thermal(energies, dummy, hi)[0] > target:
        return hi
    if _thermal(energies, dummy, lo)[0] < target:
        return lo
    # mean energy falls monotonically with beta
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        e = _thermal(energies, dummy, mid)[0]
        if abs(e - target) < tol:
            return mid
        if e > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gibbs_sz_curve(energies: np.ndarray, sz_diag: np.ndarray, grid) -> list[tuple[float, float]]:
    """Canonical ``<S_z>_beta(E)`` on an energy grid.

    ``sz_diag`` holds ``<n|S_z|n>`` for every eigenstate; the thermal trace
    is basis independent so degenerate multiplets need no special care.
    """
    energies = np.asarray(energies, dtype=float)
    sz_diag = np.asarray(sz_diag, dtype=float)
    out = []
    for E in grid:
        beta = gibbs_beta(energies, float(E))
        out.append((float(E), _thermal(energies, sz_diag, beta)[1]))
    return out


# --- entanglement -----------------------------------------------------------------------


def _split_codes(codes: np.ndarray, cut: int) -> tuple[np.ndarray, np.ndarray]:
    base = np.int64(3**cut)
    return codes % base, codes // base


def schmidt_values(state: np.ndarray, basis: ConstrainedBasis, cut: int) -> np.ndarray:
    """Squared Schmidt coefficients for the split ``[0, cut) | [cut, L)``, descending.

    Each half is embedded in its own string space, so non-product constrained
    states are handled without any normalisation fix-ups.
    """
    state = np.asarray(state)
    if not 1 <= cut < basis.L:
        raise ValueError("cut must satisfy 1 <= cut < L")
    nz = np.flatnonzero(state)
    left, right = _split_codes(basis.codes[nz], cut)
    lu, li = np.unique(left, return_inverse=True)
    ru, ri = np.unique(right, return_inverse=True)
    M = np.zeros((lu.size, ru.size), dtype=state.dtype)
    M[li, ri] = state[nz]
    s = np.linalg.svd(M, compute_uv=False)
    return s**2


def von_neumann(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def entanglement_entropy(state: np.ndarray, basis: ConstrainedBasis, cut: int | None = None) -> float:
    """Von Neumann entropy (nats) of the left ``cut`` sites; defaults to half the chain."""
    cut = basis.L // 2 if cut is None else cut
    return von_neumann(schmidt_values(state, basis, cut))


class Bipartition:
    """Reshaping map from a basis to ``left strings x right strings`` for a fixed cut.

    Built once per (basis, cut, support) and reused for many states.  Only
    basis states in ``support`` (default: all) enter the matrices.  The
    amplitude matrix is block diagonal over the connected components of the
    graph joining left and right strings that co-occur in the support, and
    each block is handled separately.
    """

    def __init__(self, basis: ConstrainedBasis, cut: int | None = None, support: np.ndarray | None = None):
        self.cut = basis.L // 2 if cut is None else cut
        if not 1 <= self.cut < basis.L:
            raise ValueError("cut must satisfy 1 <= cut < L")
        self.support = np.arange(basis.dim) if support is None else np.asarray(support)
        left, right = _split_codes(basis.codes[self.support], self.cut)
        lu, self.li = np.unique(left, return_inverse=True)
        ru, self.ri = np.unique(right, return_inverse=True)
        self.shape = (lu.size, ru.size)
        nl, nr = self.shape
        graph = sp.csr_matrix((np.ones(self.li.size), (self.li, self.ri + nl)), shape=(nl + nr, nl + nr))
        n_blocks, label = connected_components(graph, directed=False)
        comp = label[self.li]
        self.blocks = []
        for c in range(n_blocks):
            rows = np.flatnonzero(comp == c)
            if rows.size == 0:
                continue
            bl, li = np.unique(self.li[rows], return_inverse=True)
            br, ri = np.unique(self.ri[rows], return_inverse=True)
            self.blocks.append((rows, li, ri, (bl.size, br.size)))

    def matrices(self, vectors: np.ndarray) -> np.ndarray:
        """Stack of amplitude matrices for the columns of ``vectors`` (rows indexed over support)."""
        M = np.zeros((vectors.shape[1],) + self.shape, dtype=vectors.dtype)
        M[:, self.li, self.ri] = vectors.T
        return M

    def entropies(self, vectors: np.ndarray, batch: int = 64) -> np.ndarray:
        """Entropies of the columns of ``vectors`` restricted to the support rows."""
        vectors = np.asarray(vectors)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        out = np.zeros(vectors.shape[1])
        for rows, li, ri, shape in self.blocks:
            sub = vectors[rows]
            if min(shape) == 1:
                p = (np.abs(sub) ** 2).sum(axis=0)[:, None]
                out += _entropy_terms(p)
                continue
            small_left = shape[0] <= shape[1]
            for start in range(0, sub.shape[1], batch):
                chunk = sub[:, start:start + batch]
                M = np.zeros((chunk.shape[1],) + shape, dtype=chunk.dtype)
                M[:, li, ri] = chunk.T
                Mh = M.conj().transpose(0, 2, 1)
                G = M @ Mh if small_left else Mh @ M
                out[start:start + chunk.shape[1]] += _entropy_terms(np.linalg.eigvalsh(G).real)
        return out

    def entropy(self, vector: np.ndarray) -> float:
        return float(self.entropies(np.asarray(vector)[:, None])[0])


def _entropy_terms(p: np.ndarray) -> np.ndarray:
    """Row sums of ``-p ln p`` with round-off negatives clipped."""
    p = np.clip(p, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 1e-300, -p * np.log(p), 0.0).sum(axis=1)


def entanglement_entropies(vectors, basis: ConstrainedBasis, cut: int | None = None,
                           batch: int = 64) -> np.ndarray:
    """Entropies of many states (columns, dense or sparse) sharing one basis.

    Only the basis states in the joint support enter the reshaped matrices,
    which keeps the per-state eigenproblem small for fragmented spectra.
    """
    if sp.issparse(vectors):
        vectors = vectors.tocsr()
        support = np.flatnonzero(np.diff(vectors.indptr))
        sub = vectors[support].toarray()
    else:
        vectors = np.asarray(vectors)
        support = np.flatnonzero(np.any(vectors != 0, axis=1))
        sub = vectors[support]
    return Bipartition(basis, cut, support).entropies(sub, batch)


def single_site_rdm(state: np.ndarray, basis: ConstrainedBasis, site: int = 0) -> np.ndarray:
    """3x3 reduced density matrix of one site, rows/columns ordered ``-, 0, +``."""
    state = np.asarray(state)
    d = basis.digits[:, site].astype(np.int64)
    rest = basis.codes - d * np.int64(3**site)
    ru, ri = np.unique(rest, return_inverse=True)
    M = np.zeros((3, ru.size), dtype=state.dtype)
    M[d, ri] = state
    return M @ M.conj().T


# --- exact integer-energy states of Model-I ---------------------------------------------


@dataclass(eq=False)
class SpecialState:
    n: int
    sign: int
    L: int
    basis: ConstrainedBasis
    vector: np.ndarray

    @property
    def energy(self) -> int:
        return self.sign * self.n


def orbit_state(basis: ConstrainedBasis, pattern: str) -> np.ndarray:
    """Normalised equal-weight sum over the distinct translates of ``pattern``."""
    code = encode_string(pattern)
    images = np.unique([translate_codes(np.array([code]), basis.L, s)[0] for s in range(basis.L)])
    v = np.zeros(basis.dim)
    pos = basis.lookup(images)
    if np.any(pos < 0):
        raise ValueError(f"{pattern} is not a Model-I configuration")
    v[pos] = 1.0 / np.sqrt(images.size)
    return v


def build_special_state(n: int, sign: int, L: int, basis: ConstrainedBasis | None = None) -> SpecialState:
    """Exact Model-I eigenstate at energy ``sign * n`` on a periodic chain (n = 1 or 2).

    n = 1 mixes the three translates of ``+...+ - m -`` with amplitudes
    1/2, 1/2 and sign/sqrt 2 for m = -, +, 0.  n = 2 glues two half-chains of
    that form and combines the six resulting orbit states.
    """
    if n not in (1, 2) or sign not in (1, -1):
        raise ValueError("n must be 1 or 2 and sign +1 or -1")
    if L < 5 * n:
        raise LengthTooSmall(f"E=+-{n} special states need L >= {5 * n}")
    if n == 2 and L % 2:
        raise LengthTooSmall("E=+-2 special states need even L")
    if basis is None:
        basis = enumerate_basis(MODEL_I, L, Boundary.PBC)
    if basis.constraint.forbidden != MODEL_I.forbidden or basis.boundary is not Boundary.PBC or basis.L != L:
        raise ValueError("special states live in the periodic Model-I basis of the same L")

    if n == 1:
        pad = "+" * (L - 3)
        psi = {m: orbit_state(basis, pad + "-" + m + "-") for m in "-+0"}
        v = 0.5 * psi["-"] + 0.5 * psi["+"] + sign / np.sqrt(2.0) * psi["0"]
    else:
        pad = "+" * (L // 2 - 3)

        def half(a, b):
            return orbit_state(basis, pad + "-" + a + "-" + pad + "-" + b + "-")

        v = (sign * 0.25 * half("-", "-") + sign / np.sqrt(8.0) * half("+", "-")
             + sign * 0.25 * half("+", "+") + 0.5 * half("0", "-") + 0.5 * half("+", "0")
             + sign * 0.5 * half("0", "0"))
    v = v / np.linalg.norm(v)
    return SpecialState(n, sign, L, basis, v)


def special_state_schmidt_reference(n: int, L: int, cut: int | None = None) -> np.ndarray:
    """Nonzero Schmidt weights of the special states, descending.

    For n = 1 and a left block of ``cut`` sites (``4 <= cut <= L-4``) the
    weights are ``(cut-2)/L``, ``(L-cut-2)/L`` and four times ``1/L``.  The
    n = 2 family is tabulated for the half cut of even ``L`` only.
    """
    if n == 1:
        cut = L // 2 if cut is None else cut
        if not 4 <= cut <= L - 4:
            raise ValueError("the n=1 Schmidt formula needs 4 <= cut <= L-4")
        return np.sort(np.array([(cut - 2) / L, (L - cut - 2) / L] + [1 / L] * 4))[::-1]
    if cut not in (None, L // 2) or L % 2:
        raise ValueError("the n=2 Schmidt formula covers the half cut of even L")
    return np.full(L // 2, 2 / L)


def special_state_entropy_reference(n: int, L: int, cut: int | None = None) -> float:
    p = special_state_schmidt_reference(n, L, cut)
    return float(-(p * np.log(p)).sum())


def special_state_rdm_reference(L: int, sign: int = 1) -> np.ndarray:
    """Single-site density matrix of the E = +-1 states, ordered ``-, 0, +``.

    Coherences between ``|0>`` and ``|+->`` carry the sign of the energy.
    """
    c0 = sign / (2 * np.sqrt(2.0) * L)
    cpm = 1 / (4 * L)
    return np.array([
        [9 / (4 * L), c0, cpm],
        [c0, 1 / (2 * L), c0],
        [cpm, c0, 1 - 11 / (4 * L)],
    ])


# --- reports ----------------------------------------------------------------------------


def write_eigenreport(path: "str | Path", energies, sz, s_half, groups) -> None:
    """CSV with columns ``index,energy,S_z,S_half,degeneracy_group``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "energy", "S_z", "S_half", "degeneracy_group"])
        for i, (e, m, s, g) in enumerate(zip(energies, sz, s_half, groups)):
            w.writerow([i, f"{e:.17g}", f"{m:.17g}", f"{s:.17g}", int(g)])
