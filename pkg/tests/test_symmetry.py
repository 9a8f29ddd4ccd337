import numpy as np
import pytest

from constrained_pxp.basis import MODEL_I, MODEL_II, MODEL_III, enumerate_basis
from constrained_pxp.errors import DimensionMismatch, RequiresPBC, RequiresRealSector
from constrained_pxp.hamiltonian import build_hamiltonian, build_sector_hamiltonian
from constrained_pxp.symmetry import apply_particle_hole, build_sector, translate_codes


def _all_sectors(L):
    for k in range(L):
        if k == 0 or 2 * k == L:
            for inv in (1, -1):
                yield k, inv
        else:
            yield k, None


@pytest.mark.parametrize("c", [MODEL_I, MODEL_III], ids=lambda c: c.name)
@pytest.mark.parametrize("L", [6, 7, 8])
def test_sectors_partition_the_spectrum(c, L):
    b = enumerate_basis(c, L, "PBC")
    H = build_hamiltonian(b)
    full = np.linalg.eigvalsh(H.toarray())
    parts, dims = [], 0
    for k, inv in _all_sectors(L):
        s = build_sector(b, k, inv)
        dims += s.dim
        U = s.lift.toarray()
        np.testing.assert_allclose(U.conj().T @ U, np.eye(s.dim), atol=1e-12)
        Hk = U.conj().T @ H.toarray() @ U
        parts.append(np.linalg.eigvalsh(Hk))
    assert dims == b.dim
    np.testing.assert_allclose(np.sort(np.concatenate(parts)), full, atol=1e-12)


def test_sector_states_are_eigenstates_of_translation():
    b = enumerate_basis(MODEL_II, 6, "PBC")
    s = build_sector(b, 2)
    U = s.lift.toarray()
    shifted = b.lookup(translate_codes(b.codes, 6, 1))
    T = np.zeros((b.dim, b.dim))
    T[shifted, np.arange(b.dim)] = 1.0
    np.testing.assert_allclose(T @ U, np.exp(2j * np.pi * 2 / 6) * U, atol=1e-12)


def test_real_sector_hamiltonian_matches_projection():
    b = enumerate_basis(MODEL_I, 10, "PBC")
    s = build_sector(b, 0, 1)
    Hs = build_sector_hamiltonian(s).toarray()
    U = s.lift.toarray()
    np.testing.assert_allclose(Hs, (U.T @ build_hamiltonian(b).toarray() @ U).real, atol=1e-13)


def test_errors():
    with pytest.raises(RequiresPBC):
        build_sector(enumerate_basis(MODEL_I, 6, "OBC"), 0)
    b = enumerate_basis(MODEL_I, 6, "PBC")
    with pytest.raises(RequiresRealSector):
        build_sector_hamiltonian(build_sector(b, 1))
    with pytest.raises(ValueError):
        build_sector(b, 1, 1)
    with pytest.raises(DimensionMismatch):
        apply_particle_hole(b, np.ones(3))


def test_translate_codes_roundtrip():
    b = enumerate_basis(MODEL_III, 7, "PBC")
    for s in range(8):
        back = translate_codes(translate_codes(b.codes, 7, s), 7, -s)
        np.testing.assert_array_equal(back, b.codes)
    # (T c)_i = c_{i-1}: the last site moves to the front
    code = b.codes[b.index("+-0----")]
    assert b.state_string(b.index(int(translate_codes(np.array([code]), 7, 1)[0]))) == "-+-0---"


def test_report_header():
    s = build_sector(enumerate_basis(MODEL_I, 6, "PBC"), 0, -1)
    assert s.report().splitlines()[0] == f"# k=0 I=-1 dim={s.dim}"
