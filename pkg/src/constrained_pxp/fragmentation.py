"""Connected components of the configuration graph, inert states and Model-II label sectors."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .basis import MINUS, PLUS, ZERO, Boundary, ConstrainedBasis, ConstraintSet, digits_of, enumerate_basis
from .hamiltonian import SparseOperator, build_hamiltonian

DEFAULT_MOTIFS = ("++", "+++", "++-++", "++--++")


def _motif_counts_digits(digits: np.ndarray, motif: str, periodic: bool) -> np.ndarray:
    pattern = ["-0+".index(c) for c in motif]
    n, L = digits.shape
    m = len(pattern)
    if m > L:
        return np.zeros(n, dtype=np.int64)
    starts = range(L) if periodic else range(L - m + 1)
    counts = np.zeros(n, dtype=np.int64)
    for s in starts:
        hit = np.ones(n, dtype=bool)
        for k, d in enumerate(pattern):
            hit &= digits[:, (s + k) % L] == d
        counts += hit
    return counts


def _state_digits(space) -> tuple[np.ndarray, np.ndarray, bool]:
    """Digits, codes and periodicity for a basis or a symmetry sector's representatives."""
    if isinstance(space, ConstrainedBasis):
        return space.digits, space.codes, space.boundary is Boundary.PBC
    parent = space.parent
    return digits_of(space.representatives, parent.L), space.representatives, True


@dataclass
class Fragment:
    indices: np.ndarray
    labels: dict[str, int]
    min_code: int

    @property
    def size(self) -> int:
        return int(self.indices.size)

    def key(self) -> tuple:
        return (self.size, tuple(sorted(self.labels.items())), self.min_code)


@dataclass
class FragmentDecomposition:
    """Components sorted by size (largest first), ties broken by smallest member code."""

    space: object
    fragments: list[Fragment]
    motifs: tuple[str, ...]
    label_spread: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.fragments)

    @property
    def sizes(self) -> list[int]:
        return [f.size for f in self.fragments]

    def histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for s in self.sizes:
            hist[s] = hist.get(s, 0) + 1
        return dict(sorted(hist.items(), reverse=True))

    def labels_constant(self) -> bool:
        return all(v == 0 for v in self.label_spread.values())

    def with_labels(self, **labels: int) -> list[Fragment]:
        return [f for f in self.fragments if all(f.labels.get(k) == v for k, v in labels.items())]

    def export_csv(self, path: "str | Path") -> None:
        """Columns ``component_id,size,N_pp,N_ppp,extra_labels,min_code``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["component_id", "size", "N_pp", "N_ppp", "extra_labels", "min_code"])
            for i, f in enumerate(self.fragments):
                extra = ";".join(f"N[{m}]={f.labels[m]}" for m in self.motifs if m not in ("++", "+++"))
                w.writerow([i, f.size, f.labels.get("++", ""), f.labels.get("+++", ""), extra, f.min_code])


def decompose(H: "SparseOperator | sp.spmatrix", space, motifs=DEFAULT_MOTIFS) -> FragmentDecomposition:
    """Split ``space`` (a basis or a symmetry sector) into connected components of ``H``.

    Edges are the nonzero off-diagonal entries.  Each component is labelled by
    the motif counts of its members; ``label_spread`` records the largest
    within-component variation of every motif (zero for conserved motifs).
    """
    M = H.matrix if isinstance(H, SparseOperator) else sp.csr_matrix(H)
    M = M.copy()
    M.setdiag(0)
    M.eliminate_zeros()
    n_comp, comp = connected_components(M, directed=False)
    digits, codes, periodic = _state_digits(space)
    counts = {m: _motif_counts_digits(digits, m, periodic) for m in motifs}

    order = np.argsort(comp, kind="stable")
    bounds = np.searchsorted(comp[order], np.arange(n_comp + 1))
    spread = {m: 0 for m in motifs}
    fragments = []
    for c in range(n_comp):
        idx = order[bounds[c]:bounds[c + 1]]
        labels = {}
        for m in motifs:
            vals = counts[m][idx]
            labels[m] = int(vals[0])
            spread[m] = max(spread[m], int(vals.max() - vals.min()))
        fragments.append(Fragment(idx, labels, int(codes[idx].min())))
    fragments.sort(key=lambda f: (-f.size, f.min_code))
    return FragmentDecomposition(space, fragments, tuple(motifs), spread)


@dataclass
class InertCensus:
    L: int
    boundary: Boundary
    count: int
    states: list[str] | None = None


def enumerate_inert(constraint: ConstraintSet, L: int, boundary="PBC", explicit: bool | None = None) -> InertCensus:
    """States whose every single-site flip leaves the basis (empty Hamiltonian row)."""
    basis = enumerate_basis(constraint, L, boundary)
    H = build_hamiltonian(basis)
    empty = np.flatnonzero(np.diff(H.matrix.indptr) == 0)
    if explicit is None:
        explicit = L <= 20
    states = [basis.state_string(int(i)) for i in empty] if explicit else None
    return InertCensus(L, basis.boundary, int(empty.size), states)


def lucas(n: int) -> int:
    a, b = 2, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def fibonacci(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


_COS_QUARTER = (1, 0, -1, 0)
_SIN_QUARTER = (0, 1, 0, -1)


def inert_count_closed_form(L: int, boundary="PBC") -> int:
    """Exact Model-I inert-state count.

    With ``phi = (1+sqrt 5)/2`` the powers combine into Lucas and Fibonacci
    numbers: PBC gives ``2 cos(pi L/2) + Lucas(L)`` and OBC gives
    ``(3 Lucas(L) + 5 F(L) + 4 (cos(pi L/2) - 2 sin(pi L/2))) / 10``.
    """
    boundary = Boundary.parse(boundary)
    c, s = _COS_QUARTER[L % 4], _SIN_QUARTER[L % 4]
    if boundary is Boundary.PBC:
        return 2 * c + lucas(L)
    num = 3 * lucas(L) + 5 * fibonacci(L) + 4 * (c - 2 * s)
    if num % 10:
        raise ArithmeticError(f"non-integer OBC inert count at L={L}")
    return num // 10


def inert_count_recurrence(L: int, boundary="PBC") -> int:
    """``I_L = I_{L-1} + I_{L-3} + I_{L-4}`` seeded with the closed form at L = 2..5."""
    if L <= 5:
        return inert_count_closed_form(L, boundary)
    seq = [inert_count_closed_form(n, boundary) for n in range(2, 6)]
    for _ in range(6, L + 1):
        seq.append(seq[-1] + seq[-3] + seq[-4])
    return seq[-1]


def inert_asymptotic_ratio(L: int) -> float:
    """OBC/PBC inert-count ratio from the closed forms."""
    return inert_count_closed_form(L, "OBC") / inert_count_closed_form(L, "PBC")


# --- Model-II label sectors -------------------------------------------------------------

SQRT_HALF = 1.0 / np.sqrt(2.0)


def _adjacent_pairs(L: int, periodic: bool):
    pairs = [(i, i + 1) for i in range(L - 1)]
    if periodic and L > 2:
        pairs.append((L - 1, 0))
    return pairs


def spin_half_choices(labels, periodic: bool) -> list[tuple[int, ...]]:
    """Subsets of +1 sites carrying ``|0>`` (spin-1/2 up) with no two adjacent."""
    plus_sites = [i for i, l in enumerate(labels) if l == 1]
    L = len(labels)
    pairs = _adjacent_pairs(L, periodic)
    out = []
    for r in range(len(plus_sites) + 1):
        for subset in itertools.combinations(plus_sites, r):
            chosen = set(subset)
            if any(a in chosen and b in chosen for a, b in pairs):
                continue
            out.append(subset)
    return out


def sector_decomposition_model2(basis: ConstrainedBasis, labels) -> sp.csc_matrix:
    """Orthonormal basis of the subspace with ``O_i`` eigenvalue ``labels[i]``.

    Columns are product states built from the local eigenvectors
    ``(|+> + |->)/sqrt 2`` and ``|0>`` (eigenvalue +1) and
    ``(|+> - |->)/sqrt 2`` (eigenvalue -1), keeping only those without two
    adjacent ``|0>``.  Column order follows :func:`spin_half_choices`.
    """
    labels = [int(l) for l in labels]
    L = basis.L
    if len(labels) != L or any(l not in (1, -1) for l in labels):
        raise ValueError("labels must be a +-1 sequence of length L")
    periodic = basis.boundary is Boundary.PBC
    rows, cols, data = [], [], []
    for col, zeros in enumerate(spin_half_choices(labels, periodic)):
        free = [i for i in range(L) if i not in zeros]
        signs = np.array(list(itertools.product((MINUS, PLUS), repeat=len(free))), dtype=np.int64)
        digits = np.full((signs.shape[0], L), ZERO, dtype=np.int64)
        if free:
            digits[:, free] = signs
        amp = np.full(signs.shape[0], SQRT_HALF ** len(free))
        for j, site in enumerate(free):
            if labels[site] == -1:
                amp = np.where(signs[:, j] == MINUS, -amp, amp)
        codes = digits @ (3 ** np.arange(L, dtype=np.int64))
        pos = basis.lookup(codes)
        if np.any(pos < 0):
            raise ValueError("basis is missing states of the label sector; is it a Model-II basis?")
        rows.append(pos)
        cols.append(np.full(pos.size, col))
        data.append(amp)
    n_cols = len(spin_half_choices(labels, periodic))
    return sp.csc_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(basis.dim, n_cols))


def model2_sector_hamiltonian(labels, periodic: bool = True) -> sp.csr_matrix:
    """Sector Hamiltonian in the spin-1/2 language: ``sum sigma^x`` on +1 sites, no adjacent ups.

    Rows follow :func:`spin_half_choices`; cheap enough for L = 20.
    """
    choices = spin_half_choices(labels, periodic)
    index = {frozenset(c): i for i, c in enumerate(choices)}
    plus_sites = [i for i, l in enumerate(labels) if int(l) == 1]
    rows, cols = [], []
    for i, c in enumerate(choices):
        s = frozenset(c)
        for site in plus_sites:
            j = index.get(s ^ {site})
            if j is not None:
                rows.append(i)
                cols.append(j)
    n = len(choices)
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))


def is_noninteracting(labels, periodic: bool = True) -> bool:
    """True when every +1 site is flanked by -1 sites."""
    L = len(labels)
    return not any(labels[a] == 1 and labels[b] == 1 for a, b in _adjacent_pairs(L, periodic))


def count_noninteracting_labels(L: int, boundary="PBC") -> int:
    periodic = Boundary.parse(boundary) is Boundary.PBC
    return sum(is_noninteracting(l, periodic) for l in itertools.product((1, -1), repeat=L))


def noninteracting_labels_closed_form(L: int, boundary="PBC") -> int:
    """Strings without adjacent +1: Lucas(L) on a ring, F(L+2) on an open chain."""
    if Boundary.parse(boundary) is Boundary.PBC:
        return lucas(L) if L > 2 else count_noninteracting_labels(L, "PBC")
    return fibonacci(L + 2)


def model2_label_weights(basis: ConstrainedBasis, state: np.ndarray) -> dict[tuple[int, ...], float]:
    """Weight of ``state`` in every ``O_i`` label sector.

    ``O_i`` fixes the positions of ``|0>`` and acts as ``sigma^x`` on the
    ``+/-`` sites, so the weights follow from a Walsh-Hadamard transform of
    the amplitudes over ``+/-`` assignments for each pattern of zeros.
    Sites holding ``|0>`` carry label +1.
    """
    L = basis.L
    state = np.asarray(state)
    digits = basis.digits
    zero_mask = (digits == ZERO) @ (1 << np.arange(L))
    plus_mask = (digits == PLUS) @ (1 << np.arange(L))
    weights = np.zeros(2**L)
    for zmask in np.unique(zero_mask[np.abs(state) > 0]):
        sel = zero_mask == zmask
        free = [i for i in range(L) if not (zmask >> i) & 1]
        n = len(free)
        amps = np.zeros(2**n, dtype=state.dtype)
        compact = np.zeros(int(sel.sum()), dtype=np.int64)
        pm = plus_mask[sel]
        for j, site in enumerate(free):
            compact |= ((pm >> site) & 1) << j
        amps[compact] = state[sel]
        # sign convention: label -1 picks (|+> - |->)/sqrt 2, so a |-> contributes -1
        h = amps.astype(complex)
        for j in range(n):
            h = h.reshape(-1, 2, 2**j)
            a, b = h[:, 0, :].copy(), h[:, 1, :].copy()
            h[:, 0, :] = (b + a)
            h[:, 1, :] = (b - a)
            h = h.reshape(-1)
        h = h / np.sqrt(2.0) ** n
        # bit j of the transformed index set: label -1 on free site j
        idx = np.arange(2**n, dtype=np.int64)
        label_mask = np.zeros(2**n, dtype=np.int64)
        for j, site in enumerate(free):
            label_mask |= ((idx >> j) & 1) << site
        np.add.at(weights, label_mask, np.abs(h) ** 2)
    out = {}
    for mask in range(2**L):
        labels = tuple(-1 if (mask >> i) & 1 else 1 for i in range(L))
        out[labels] = float(weights[mask])
    return out
