"""Eigenstate reports: per-state ``S_z`` and half-chain entropy in a symmetry sector,
the canonical ``S_z`` curve, and how the exact integer-energy states compare to it."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import MODEL_I, ConstrainedBasis, ConstraintSet, enumerate_basis
from .fragmentation import decompose
from .hamiltonian import build_hamiltonian, build_sector_hamiltonian
from .spectral import (Bipartition, DENSE_LIMIT, build_special_state, diagonalize, gibbs_sz_curve,
                       magnetization, write_eigenreport)
from .symmetry import SymmetrySector, build_sector


@dataclass(eq=False)
class EigenReport:
    """Sorted sector spectrum with ``S_z``, ``S_half`` and degeneracy group per eigenstate."""

    basis: ConstrainedBasis
    sector: SymmetrySector
    energies: np.ndarray
    sz: np.ndarray
    s_half: np.ndarray
    fragment: np.ndarray
    meta: dict = field(default_factory=dict)

    def degeneracy_groups(self, tol: float = 1e-8) -> np.ndarray:
        if self.energies.size == 0:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([[0], np.cumsum(np.diff(self.energies) > tol)])

    def gibbs_curve(self, grid=None, points: int = 201) -> list[tuple[float, float]]:
        """Canonical ``<S_z>`` in the same sector, on ``grid`` or an interior uniform grid."""
        if grid is None:
            lo, hi = self.energies.min(), self.energies.max()
            pad = 1e-3 * (hi - lo)
            grid = np.linspace(lo + pad, hi - pad, points)
        return gibbs_sz_curve(self.energies, self.sz, grid)

    def write_csv(self, path: "str | Path") -> None:
        write_eigenreport(path, self.energies, self.sz, self.s_half, self.degeneracy_groups())


def _lifted_entropies(sector: SymmetrySector, cols: np.ndarray, vectors: np.ndarray, cut: int | None,
                      batch: int) -> np.ndarray:
    """Half-chain entropies of sector eigenvectors supported on representative columns ``cols``."""
    lift = sector.lift[:, cols].tocsr()
    support = np.flatnonzero(np.diff(lift.indptr))
    lift = lift[support]
    part = Bipartition(sector.parent, cut, support)
    out = np.empty(vectors.shape[1])
    for start in range(0, vectors.shape[1], batch):
        chunk = lift @ vectors[:, start:start + batch]
        out[start:start + chunk.shape[1]] = part.entropies(chunk, batch)
    return out


def sector_eigenreport(constraint: ConstraintSet, L: int, k: int = 0, inversion: int | None = 1,
                       cut: int | None = None, dense_limit: int = DENSE_LIMIT,
                       batch: int = 64) -> EigenReport:
    """Diagonalise a real PBC sector fragment by fragment and tabulate every eigenstate.

    Fragments are the connected components of the sector Hamiltonian, so
    each block is diagonalised on its own and its eigenvectors are lifted
    only onto the parent states it touches.
    """
    basis = enumerate_basis(constraint, L, "PBC")
    sector = build_sector(basis, k, inversion)
    Hs = build_sector_hamiltonian(sector, build_hamiltonian(basis)).matrix.tocsr()
    frags = decompose(Hs, sector, motifs=())
    E, SZ, S, F = [], [], [], []
    for fid, frag in enumerate(frags.fragments):
        idx = np.asarray(frag.indices)
        eig = diagonalize(Hs[idx][:, idx], dense_limit=dense_limit)
        full = np.zeros((sector.dim, eig.dim))
        full[idx] = eig.vectors
        E.append(eig.energies)
        SZ.append(magnetization(full, sector))
        S.append(_lifted_entropies(sector, idx, eig.vectors, cut, batch))
        F.append(np.full(eig.dim, fid))
    E, SZ, S, F = (np.concatenate(a) for a in (E, SZ, S, F))
    order = np.argsort(E, kind="stable")
    return EigenReport(basis, sector, E[order], SZ[order], S[order], F[order],
                       {"model": constraint.name, "L": L, "k": k, "inversion": inversion,
                        "fragments": len(frags)})


def special_states_vs_gibbs(report: EigenReport) -> list[dict]:
    """``S_z`` of each exact integer-energy state against the canonical value at its energy.

    Only families that exist at this ``L`` are included (``n = 2`` needs
    an even ``L >= 10``); other models give an empty list.
    """
    L = report.basis.L
    rows = []
    if report.basis.constraint.forbidden != MODEL_I.forbidden:
        return rows
    for n in (1, 2):
        if n == 2 and (L % 2 or L < 10):
            continue
        if n == 1 and L < 5:
            continue
        for sign in (1, -1):
            st = build_special_state(n, sign, L, report.basis)
            sz = float(magnetization(st.vector, report.basis))
            (_, thermal), = gibbs_sz_curve(report.energies, report.sz, [float(st.energy)])
            rows.append({"n": n, "sign": sign, "energy": st.energy, "S_z": sz,
                         "S_z_thermal": thermal, "excess": sz - thermal})
    return rows


def write_report_bundle(report: EigenReport, out: "str | Path", stem: str,
                        with_special: bool = True) -> dict:
    """Write ``<stem>_eigen.csv``, ``<stem>_gibbs.csv`` and ``<stem>_summary.json``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / f"{stem}_eigen.csv")
    lines = ["energy,S_z_thermal"] + [f"{e:.17g},{s:.17g}" for e, s in report.gibbs_curve()]
    (out / f"{stem}_gibbs.csv").write_text("\n".join(lines) + "\n")
    summary = dict(report.meta, dim=int(report.energies.size))
    if with_special:
        summary["special_states"] = special_states_vs_gibbs(report)
    (out / f"{stem}_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
