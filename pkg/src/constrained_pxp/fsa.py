"""Forward scattering approximation from the Neel-like state ``|Z2> = |-+-+...>``.

Site ``i`` (0-based) holds ``|->`` in ``|Z2>`` when ``i`` is even and ``|+>``
when odd.  ``H+`` moves every site towards the opposite Neel pattern: it
raises ``m`` on the ``|->`` sublattice and lowers it on the ``|+>``
sublattice, so ``H- = (H+)^T`` annihilates ``|Z2>`` and ``H+`` annihilates
``|Z2bar>``.  After ``2L`` steps the forward iteration reaches ``|Z2bar>``.

Errors are ``delta_n = || H- v_n - beta_n v_{n-1} ||^2`` by default
(``convention="norm2"``); ``convention="norm"`` reports the plain norm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .basis import MINUS, PLUS, ZERO, ConstrainedBasis
from .errors import PrematureAnnihilation, VectorsNotRetained, Z2NotInBasis
from .hamiltonian import AMPLITUDE, SparseOperator, single_site_flips


def z2_string(L: int, phase: int = 0) -> str:
    """``-+-+...`` for phase 0 and ``+-+-...`` for phase 1."""
    return "".join("-+"[(i + phase) % 2] for i in range(L))


def z2_vector(basis: ConstrainedBasis, phase: int = 0) -> np.ndarray:
    config = z2_string(basis.L, phase)
    if config not in basis:
        raise Z2NotInBasis(f"{config} violates the {basis.constraint.name} constraint")
    return basis.basis_vector(config)


@dataclass(frozen=True, eq=False)
class HamiltonianSplit:
    plus: SparseOperator
    minus: SparseOperator
    basis: ConstrainedBasis
    z2_phase: int

    @property
    def z2(self) -> np.ndarray:
        return z2_vector(self.basis, self.z2_phase)

    @property
    def z2_bar(self) -> np.ndarray:
        return z2_vector(self.basis, 1 - self.z2_phase)


def split_hamiltonian(basis: ConstrainedBasis, z2_phase: int = 0) -> HamiltonianSplit:
    """Split ``H`` into raising/lowering halves relative to ``|Z2>``.

    ``z2_phase`` picks which sublattice starts in ``|->``: 0 for even sites,
    1 for odd sites.
    """
    if basis.L % 2:
        raise ValueError("the Z2 split needs an even number of sites")
    z2_vector(basis, z2_phase)
    rows, cols = [], []
    for site in range(basis.L):
        if (site + z2_phase) % 2 == 0:
            moves = ((MINUS, ZERO), (ZERO, PLUS))
        else:
            moves = ((PLUS, ZERO), (ZERO, MINUS))
        for old, new in moves:
            r, c = single_site_flips(basis, site, old, new)
            rows.append(r)
            cols.append(c)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    Hp = sp.csr_matrix((np.full(rows.size, AMPLITUDE), (cols, rows)), shape=(basis.dim, basis.dim))
    return HamiltonianSplit(SparseOperator(Hp, hermitian=False),
                            SparseOperator(Hp.T.tocsr(), hermitian=False), basis, z2_phase)


@dataclass(eq=False)
class FsaRun:
    model: str
    L: int
    beta: np.ndarray
    delta: np.ndarray
    convention: str = "norm2"
    vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def first_error_index(self) -> int:
        """1-based index of the first step with ``delta > 1e-12`` (0 if none)."""
        hits = np.flatnonzero(self.delta > 1e-12)
        return int(hits[0]) + 1 if hits.size else 0

    @property
    def delta_total(self) -> float:
        return float(self.delta.sum())

    @property
    def hamiltonian(self) -> np.ndarray:
        """Tridiagonal ``(2L+1)``-dimensional FSA Hamiltonian."""
        n = self.beta.size + 1
        H = np.zeros((n, n))
        idx = np.arange(n - 1)
        H[idx, idx + 1] = self.beta
        H[idx + 1, idx] = self.beta
        return H

    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        return eigh_tridiagonal(np.zeros(self.beta.size + 1), self.beta)

    def write_csv(self, path: "str | Path") -> None:
        lines = ["n,beta_n,delta_n"]
        lines += [f"{n},{b:.17g},{d:.17g}" for n, (b, d) in enumerate(zip(self.beta, self.delta), start=1)]
        Path(path).write_text("\n".join(lines) + "\n")

    def summary(self) -> dict:
        analytic = None
        if self.model in ANALYTIC_MODELS:
            analytic = float(analytic_first_error(self.model, self.L))
            if self.convention == "norm":
                analytic = float(np.sqrt(analytic))
        nf = self.first_error_index
        return {
            "model": self.model,
            "L": self.L,
            "n_f": nf,
            "delta_nf": float(self.delta[nf - 1]) if nf else 0.0,
            "delta_total": self.delta_total,
            "analytic_first_error": analytic,
            "convention": self.convention,
        }

    def write_summary(self, path: "str | Path") -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")


def forward_scatter(split: HamiltonianSplit, max_steps: int | None = None, convention: str = "norm2",
                    keep_vectors: bool = False, tol: float = 1e-12) -> FsaRun:
    """Iterate ``v_n = H+ v_{n-1} / beta_n`` and record the backward mismatch."""
    if convention not in ("norm", "norm2"):
        raise ValueError("convention must be 'norm' or 'norm2'")
    L = split.basis.L
    steps = 2 * L if max_steps is None else max_steps
    Hp, Hm = split.plus.matrix, split.minus.matrix
    v = split.z2
    kept = [v] if keep_vectors else None
    betas, deltas = [], []
    for n in range(1, steps + 1):
        w = Hp @ v
        beta = float(np.linalg.norm(w))
        if beta < tol:
            raise PrematureAnnihilation(f"H+ annihilated v_{n - 1} before step {2 * L}")
        u = w / beta
        mismatch = float(np.linalg.norm(Hm @ u - beta * v))
        deltas.append(mismatch**2 if convention == "norm2" else mismatch)
        betas.append(beta)
        v = u
        if keep_vectors:
            kept.append(v)
    return FsaRun(split.basis.constraint.name, L, np.array(betas), np.array(deltas), convention,
                  np.column_stack(kept) if keep_vectors else None)


ANALYTIC_MODELS = ("MODEL_I", "MODEL_II", "MODEL_III")


def analytic_first_error(model: str, L: int) -> Fraction:
    """Closed-form first nonzero FSA error (squared-norm convention) as an exact fraction."""
    L = Fraction(L)
    if model == "MODEL_I":
        num = 12 * (L**3 - 6 * L**2 + 11 * L - 18)
        den = (L - 1) * (L - 2) * (L - 3) * (5 * L**4 - 50 * L**3 + 175 * L**2 - 250 * L + 144)
        return num / den
    if model == "MODEL_II":
        return 50 * (2 * L - 9) / ((2 * L - 5) * (6 * L**2 - 45 * L + 95))
    if model == "MODEL_III":
        return 1 / (4 * (4 * L - 11))
    raise ValueError(f"no closed form for {model}")


ANALYTIC_FIRST_INDEX = {"MODEL_I": 5, "MODEL_II": 3, "MODEL_III": 2}


def fsa_spectrum_and_overlap(run: FsaRun) -> list[tuple[float, float]]:
    """FSA eigenenergies with the ``|Z2>`` weight of each lifted FSA eigenstate."""
    if run.vectors is None:
        raise VectorsNotRetained("rerun forward_scatter with keep_vectors=True")
    E, W = run.spectrum()
    lifted = run.vectors @ W
    overlaps = np.abs(lifted[np.flatnonzero(run.vectors[:, 0])[0]]) ** 2
    return list(zip(E.tolist(), overlaps.tolist()))

