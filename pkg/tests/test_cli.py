import json
import subprocess
import sys

import pytest

from constrained_pxp.cli import RunConfig, build_parser, main


def run(args, tmp_path, capsys):
    code = main(args + ["--out", str(tmp_path)])
    return code, capsys.readouterr().out


@pytest.mark.parametrize("args,dim", [
    (["basis", "--model", "II", "--L", "4", "--bc", "obc"], 60),
    (["basis", "--model", "free", "--L", "3"], 27),
    (["basis", "--forbid", "00,++", "--L", "2", "--bc", "obc"], 7),
])
def test_basis_examples(args, dim, tmp_path, capsys):
    code, out = run(args, tmp_path, capsys)
    assert code == 0 and f"dim={dim}" in out
    report = json.loads((tmp_path / "basis_report.json").read_text())
    assert report["dim"] == report["transfer_matrix_dim"] == dim


def test_forbid_matches_preset(tmp_path, capsys):
    run(["basis", "--forbid", "00,++", "--L", "2", "--bc", "obc"], tmp_path, capsys)
    assert json.loads((tmp_path / "basis_report.json").read_text())["constraint"] == "MODEL_III"


def test_verify_model_i(tmp_path, capsys):
    code, out = run(["verify", "--model", "I", "--L", "10"], tmp_path, capsys)
    assert code == 0 and out.strip().endswith("PASS")
    names = {c["check"] for c in json.loads((tmp_path / "verify.json").read_text())["checks"]}
    assert {"N_pp_conserved", "pm_energy_symmetry", "inert_closed_form", "special_n1_+_residual"} <= names


def test_fsa_summary(tmp_path, capsys):
    code, _ = run(["fsa", "--model", "III", "--L", "12"], tmp_path, capsys)
    s = json.loads((tmp_path / "fsa_summary.json").read_text())
    assert code == 0 and s["n_f"] == 2
    assert s["delta_nf"] == pytest.approx(1 / (4 * (4 * 12 - 11)), abs=1e-12)


def test_quench_norm(tmp_path, capsys):
    code, _ = run(["quench", "--model", "II", "--L", "6", "--tmax", "2"], tmp_path, capsys)
    lines = (tmp_path / "quench.csv").read_text().splitlines()
    assert code == 0 and lines[0] == "t,fidelity,O_avg,S_half,energy,norm"
    assert all(abs(float(l.split(",")[-1]) - 1) < 1e-12 for l in lines[1:])


@pytest.mark.parametrize("cmd", [
    ["spectrum", "--model", "III", "--L", "6"],
    ["spectrum", "--model", "I", "--L", "8", "--sector", "k=0,inv=+1"],
    ["fragments", "--model", "I", "--L", "8"],
    ["entropy", "--model", "I", "--L", "8"],
    ["fsa", "--model", "I", "--L", "8", "--fsa-convention", "norm"],
])
def test_outputs_are_deterministic(cmd, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(cmd + ["--out", str(a)]) == 0
    assert main(cmd + ["--out", str(b)]) == 0
    capsys.readouterr()
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir()) and len(files) > 1
    for name in files:
        if name != "config.json":
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_exit_codes(tmp_path, capsys):
    assert run(["basis", "--model", "IV"], tmp_path, capsys)[0] == 2
    assert run(["basis", "--sector", "k=x"], tmp_path, capsys)[0] == 2
    assert run(["spectrum", "--model", "I", "--L", "6", "--bc", "obc", "--sector", "k=0"], tmp_path, capsys)[0] == 2
    assert run(["fsa", "--model", "III", "--L", "5"], tmp_path, capsys)[0] == 2
    assert run(["basis", "--model", "free", "--L", "30"], tmp_path, capsys)[0] == 4
    assert run(["spectrum", "--model", "II", "--L", "8", "--dense-limit", "100"], tmp_path, capsys)[0] == 4
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["basis", "--bc", "xyz"])
    assert exc.value.code == 2


def test_verify_failure_exit_code(tmp_path, capsys, monkeypatch):
    import constrained_pxp.cli as cli
    monkeypatch.setattr(cli, "_verify_checks", lambda cfg: [{"check": "x", "value": 1.0, "pass": False}])
    assert run(["verify", "--model", "I", "--L", "6"], tmp_path, capsys)[0] == 3


def test_help_lists_every_config_field():
    from dataclasses import fields
    for cmd in ("basis", "spectrum", "fragments", "fsa", "quench", "entropy", "verify"):
        out = subprocess.run([sys.executable, "-m", "constrained_pxp.cli", cmd, "--help"],
                             capture_output=True, text=True, check=True).stdout
        for f in fields(RunConfig):
            if f.name != "command":
                assert "--" + f.name.replace("_", "-") in out, (cmd, f.name)


def test_config_roundtrip(tmp_path, capsys):
    run(["fsa", "--model", "II", "--L", "6"], tmp_path, capsys)
    cfg = RunConfig(**json.loads((tmp_path / "config.json").read_text()))
    assert cfg.L == 6 and cfg.model == "II" and cfg.command == "fsa"
