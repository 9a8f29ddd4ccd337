import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from constrained_pxp.basis import MODEL_I, MODEL_II, MODEL_III, PXP_SPIN1, count_dimension, enumerate_basis
from constrained_pxp.fragmentation import (count_noninteracting_labels, decompose, enumerate_inert,
                                           fibonacci, inert_asymptotic_ratio, inert_count_closed_form,
                                           inert_count_recurrence, is_noninteracting, lucas,
                                           model2_label_weights, model2_sector_hamiltonian,
                                           noninteracting_labels_closed_form, sector_decomposition_model2)
from constrained_pxp.hamiltonian import build_hamiltonian, build_sector_hamiltonian
from constrained_pxp.symmetry import build_sector
from oracles import brute_codes, spin_half_pxp


def _brute_inert(L, periodic):
    """Configurations where no single-site change stays allowed."""
    allowed = set(brute_codes(MODEL_I.forbidden, L, periodic).tolist())
    count = 0
    for code in allowed:
        digits = [(code // 3**i) % 3 for i in range(L)]
        moves = []
        for i, d in enumerate(digits):
            for new in ((0, 2) if d == 1 else (1,)):
                moves.append(code + (new - d) * 3**i)
        count += not any(m in allowed for m in moves)
    return count


@pytest.mark.parametrize("L", range(2, 10))
def test_inert_counts_against_brute_force(L):
    for bc, periodic in (("OBC", False), ("PBC", True)):
        n = enumerate_inert(MODEL_I, L, bc).count
        assert n == _brute_inert(L, periodic)
        assert n == inert_count_closed_form(L, bc)


def test_inert_recurrence_and_ratio():
    for bc in ("OBC", "PBC"):
        for L in range(6, 30):
            assert inert_count_recurrence(L, bc) == inert_count_closed_form(L, bc)
    assert inert_asymptotic_ratio(60) == pytest.approx((3 + np.sqrt(5)) / 10, rel=1e-9)


def test_inert_states_listed():
    census = enumerate_inert(MODEL_I, 6, "PBC", explicit=True)
    assert len(census.states) == census.count
    assert "++++++" in census.states


def test_lucas_fibonacci():
    assert [lucas(n) for n in range(6)] == [2, 1, 3, 4, 7, 11]
    assert [fibonacci(n) for n in range(7)] == [0, 1, 1, 2, 3, 5, 8]


def test_model_i_fragments_carry_constant_labels():
    b = enumerate_basis(MODEL_I, 10, "PBC")
    H = build_hamiltonian(b)
    frags = decompose(H, b)
    assert frags.labels_constant()
    assert sum(frags.sizes) == b.dim
    zero = [f for f in frags.fragments if f.labels["++"] == 0 and f.size > 1]
    assert max(f.size for f in zero) == count_dimension(PXP_SPIN1, 10, "PBC")
    # every fragment is connected and no edge crosses fragments
    comp = np.empty(b.dim, dtype=int)
    for i, f in enumerate(frags.fragments):
        comp[f.indices] = i
    coo = H.matrix.tocoo()
    assert np.all(comp[coo.row] == comp[coo.col])


def test_l10_npp2_fragments_in_symmetric_sector():
    b = enumerate_basis(MODEL_I, 10, "PBC")
    s = build_sector(b, 0, 1)
    frags = decompose(build_sector_hamiltonian(s), s)
    sel = [f for f in frags.fragments if f.labels["++"] == 2 and f.labels["+++"] == 0 and f.size > 1]
    labels = sorted((f.labels["++-++"], f.labels["++--++"]) for f in sel)
    assert labels == [(0, 0), (0, 1), (1, 0)]


def test_model_iii_is_connected():
    for L in range(3, 11):
        b = enumerate_basis(MODEL_III, L, "PBC")
        assert len(decompose(build_hamiltonian(b), b)) == 1


def test_export_csv(tmp_path):
    b = enumerate_basis(MODEL_I, 6, "PBC")
    frags = decompose(build_hamiltonian(b), b)
    frags.export_csv(tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "component_id,size,N_pp,N_ppp,extra_labels,min_code"
    assert len(lines) == len(frags) + 1


# --- Model-II label sectors -------------------------------------------------------------


@pytest.mark.parametrize("L", [4, 5, 6])
def test_label_sectors_block_diagonalise_model_ii(L):
    b = enumerate_basis(MODEL_II, L, "PBC")
    H = build_hamiltonian(b).matrix
    total = 0
    for labels in itertools.product((1, -1), repeat=L):
        U = sector_decomposition_model2(b, labels)
        total += U.shape[1]
        Ud = U.toarray()
        np.testing.assert_allclose(Ud.T @ Ud, np.eye(U.shape[1]), atol=1e-12)
        # H maps the sector into itself and acts as the spin-1/2 chain on +1 sites
        HU = H @ Ud
        np.testing.assert_allclose(Ud @ (Ud.T @ HU), HU, atol=1e-12)
        np.testing.assert_allclose(Ud.T @ HU, model2_sector_hamiltonian(labels).toarray(), atol=1e-12)
    assert total == b.dim


@pytest.mark.parametrize("L", [6, 8])
def test_all_plus_sector_is_spin_half_pxp(L):
    labels = (1,) * L
    E = np.linalg.eigvalsh(model2_sector_hamiltonian(labels).toarray())
    np.testing.assert_allclose(E, np.linalg.eigvalsh(spin_half_pxp(L)), atol=1e-10)
    minus = model2_sector_hamiltonian((-1,) * L).toarray()
    assert minus.shape == (1, 1) and minus[0, 0] == 0


@pytest.mark.parametrize("bc", ["OBC", "PBC"])
def test_noninteracting_count(bc):
    for L in range(3, 13):
        assert count_noninteracting_labels(L, bc) == noninteracting_labels_closed_form(L, bc)
    assert is_noninteracting((1, -1, 1, -1)) and not is_noninteracting((1, -1, -1, 1))


@settings(max_examples=15, deadline=None)
@given(L=st.integers(3, 6), seed=st.integers(0, 2**31 - 1))
def test_label_weights_match_projections(L, seed):
    b = enumerate_basis(MODEL_II, L, "PBC")
    rng = np.random.default_rng(seed)
    v = rng.normal(size=b.dim)
    v /= np.linalg.norm(v)
    w = model2_label_weights(b, v)
    for labels, weight in w.items():
        U = sector_decomposition_model2(b, labels)
        assert weight == pytest.approx(float(np.sum((U.T @ v) ** 2)), abs=1e-12)
    assert sum(w.values()) == pytest.approx(1.0)
