import json

import numpy as np
import pytest

from constrained_pxp.basis import MODEL_I, MODEL_III
from constrained_pxp.hamiltonian import build_sector_hamiltonian
from constrained_pxp.reports import sector_eigenreport, special_states_vs_gibbs, write_report_bundle
from oracles import svd_entropy


@pytest.mark.parametrize("c", [MODEL_I, MODEL_III], ids=lambda c: c.name)
def test_report_matches_dense_sector(c):
    rep = sector_eigenreport(c, 10)
    s = rep.sector
    E, V = np.linalg.eigh(build_sector_hamiltonian(s).toarray())
    np.testing.assert_allclose(rep.energies, E, atol=1e-12)
    groups = rep.degeneracy_groups()
    single = np.bincount(groups)[groups] == 1
    lifted = s.lift_vectors(V)
    b = s.parent
    S = np.array([svd_entropy(lifted[:, i], b.codes, 10, 5) for i in np.flatnonzero(single)])
    np.testing.assert_allclose(rep.s_half[single], S, atol=1e-9)
    Sz = (np.abs(lifted) ** 2).T @ b.magnetizations
    np.testing.assert_allclose(rep.sz[single], Sz[single], atol=1e-10)


def test_special_states_above_canonical_curve(tmp_path):
    rep = sector_eigenreport(MODEL_I, 12)
    rows = special_states_vs_gibbs(rep)
    assert {(r["n"], r["sign"]) for r in rows} == {(1, 1), (1, -1), (2, 1), (2, -1)}
    assert all(r["excess"] > 0 for r in rows)
    assert rows[0]["S_z"] == pytest.approx(7)
    summary = write_report_bundle(rep, tmp_path, "m1")
    assert json.loads((tmp_path / "m1_summary.json").read_text())["dim"] == summary["dim"]
    gibbs = np.loadtxt(tmp_path / "m1_gibbs.csv", delimiter=",", skiprows=1)
    # canonical S_z is even in E because the particle-hole map keeps S_z
    np.testing.assert_allclose(gibbs[:, 1], gibbs[::-1, 1], atol=1e-8)


def test_no_special_rows_for_other_models():
    assert special_states_vs_gibbs(sector_eigenreport(MODEL_III, 8)) == []
