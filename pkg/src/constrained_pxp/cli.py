"""Command-line driver.

Every subcommand writes ``config.json`` plus CSV/JSON results into ``--out``
and prints a one-line summary.  Exit codes: 0 success, 2 configuration error,
3 verification failure, 4 resource limit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .basis import (Boundary, ConstraintSet, closed_form_dimension, count_dimension, enumerate_basis,
                    growth_rate, preset)
from .errors import (ConstrainedPXPError, LengthTooLarge, MethodInfeasible, TooLargeForFullSpectrum)
from .fragmentation import (decompose, enumerate_inert, inert_count_closed_form, inert_count_recurrence,
                            model2_label_weights)
from .fsa import forward_scatter, split_hamiltonian, z2_vector
from .hamiltonian import build_hamiltonian, build_sector_hamiltonian, commutator_max, conserved_Npp, conserved_Oi
from .spectral import (DENSE_LIMIT, Bipartition, build_special_state, diagonalize, entanglement_entropies,
                       gibbs_sz_curve, magnetization, schmidt_values, single_site_rdm,
                       special_state_rdm_reference, special_state_schmidt_reference, write_eigenreport)
from .symmetry import build_sector, verify_anticommutation
from .dynamics import DEFAULT_DT, DEFAULT_TMAX, evolve_z2
from .reports import sector_eigenreport, write_report_bundle

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_RESOURCE = 0, 2, 3, 4
COMMANDS = ("basis", "spectrum", "fragments", "fsa", "quench", "entropy", "verify")


class ConfigError(ConstrainedPXPError):
    pass


@dataclass
class RunConfig:
    """Everything needed to reproduce one run."""

    command: str
    model: str | None = "I"
    forbid: str | None = None
    L: int = 8
    bc: str = "pbc"
    sector: str | None = None
    out: str = "."
    tmax: float = DEFAULT_TMAX
    dt: float = DEFAULT_DT
    fsa_convention: str = "norm2"
    observable: str = "++"
    cut: int | None = None
    dense_limit: int = DENSE_LIMIT
    workers: int | None = None

    def constraint(self) -> ConstraintSet:
        if self.forbid is not None:
            return ConstraintSet.from_pairs(self.forbid)
        try:
            return preset(self.model)
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def boundary(self) -> Boundary:
        return Boundary.parse(self.bc)

    def sector_spec(self) -> tuple[int, int | None] | None:
        """Parse ``k=<int>,inv=<+1|-1>``; ``None`` means the full space."""
        if self.sector in (None, "", "full", "FULL"):
            return None
        fields = {}
        for item in self.sector.split(","):
            key, _, value = item.partition("=")
            fields[key.strip()] = value.strip()
        if "k" not in fields or set(fields) - {"k", "inv"}:
            raise ConfigError(f"bad --sector {self.sector!r}; expected k=<int>,inv=<+1|-1>")
        try:
            k = int(fields["k"])
            inv = int(fields["inv"]) if "inv" in fields else None
        except ValueError as exc:
            raise ConfigError(f"bad --sector {self.sector!r}") from exc
        if inv not in (None, 1, -1):
            raise ConfigError("inv must be +1 or -1")
        return k, inv

    def write(self, out: Path) -> None:
        (out / "config.json").write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def _fmt(x) -> str:
    return f"{x:.17g}"


def _dump(path: Path, payload: dict) -> None:
    def clean(v):
        if isinstance(v, dict):
            return {str(k): clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, (float, np.floating)):
            return float(_fmt(v))
        return v

    path.write_text(json.dumps(clean(payload), indent=2, sort_keys=True) + "\n")


# --- subcommands ------------------------------------------------------------------------


def cmd_basis(cfg: RunConfig, out: Path) -> int:
    c, bc = cfg.constraint(), cfg.boundary()
    basis = enumerate_basis(c, cfg.L, bc)
    basis.export(out / "basis.txt")
    report = {"constraint": c.name, "forbidden": c.pair_strings(), "L": cfg.L, "bc": bc.value,
              "dim": basis.dim, "transfer_matrix_dim": count_dimension(c, cfg.L, bc),
              "growth_rate": growth_rate(c), "closed_form_obc": None}
    try:
        report["closed_form_obc"] = round(closed_form_dimension(c, cfg.L))
    except ConstrainedPXPError:
        pass
    _dump(out / "basis_report.json", report)
    print(f"dim={basis.dim}")
    return EXIT_OK


def _full_space(cfg: RunConfig):
    basis = enumerate_basis(cfg.constraint(), cfg.L, cfg.boundary())
    H = build_hamiltonian(basis)
    spec = cfg.sector_spec()
    if spec is None:
        return basis, None, H
    sector = build_sector(basis, *spec)
    return basis, sector, build_sector_hamiltonian(sector, H)


def cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    spec = cfg.sector_spec()
    if spec is not None:
        rep = sector_eigenreport(cfg.constraint(), cfg.L, *spec, cut=cfg.cut, dense_limit=cfg.dense_limit)
        summary = write_report_bundle(rep, out, "spectrum")
        print(f"dim={summary['dim']} fragments={summary['fragments']}")
        return EXIT_OK
    basis, _, H = _full_space(cfg)
    eig = diagonalize(H, basis, cfg.dense_limit)
    sz = magnetization(eig.vectors, basis)
    if cfg.L > 1:
        s_half = Bipartition(basis, cfg.cut).entropies(eig.vectors)
    else:
        s_half = np.zeros(eig.dim)
    write_eigenreport(out / "spectrum_eigen.csv", eig.energies, sz, s_half, eig.degeneracy_groups())
    if eig.dim > 2 and np.ptp(eig.energies) > 0:
        lo, hi = eig.energies.min(), eig.energies.max()
        pad = 1e-3 * (hi - lo)
        curve = gibbs_sz_curve(eig.energies, sz, np.linspace(lo + pad, hi - pad, 201))
        lines = ["energy,S_z_thermal"] + [f"{_fmt(e)},{_fmt(s)}" for e, s in curve]
        (out / "spectrum_gibbs.csv").write_text("\n".join(lines) + "\n")
    _dump(out / "spectrum_summary.json", {"dim": eig.dim, "min_energy": eig.energies.min(),
                                          "max_energy": eig.energies.max(),
                                          "pm_symmetry_error": np.abs(eig.energies + eig.energies[::-1]).max()})
    print(f"dim={eig.dim}")
    return EXIT_OK


def cmd_fragments(cfg: RunConfig, out: Path) -> int:
    basis, sector, H = _full_space(cfg)
    frags = decompose(H, sector if sector is not None else basis)
    frags.export_csv(out / "fragments.csv")
    inert = enumerate_inert(cfg.constraint(), cfg.L, cfg.boundary(), explicit=True)
    (out / "inert_states.txt").write_text("\n".join(inert.states) + ("\n" if inert.states else ""))
    summary = {"n_fragments": len(frags), "largest": frags.sizes[:10],
               "histogram": {str(k): v for k, v in sorted(frags.histogram().items())},
               "labels_constant": frags.labels_constant(), "label_spread": frags.label_spread,
               "inert_count": inert.count}
    _dump(out / "fragments_summary.json", summary)
    print(f"fragments={len(frags)} inert={inert.count}")
    return EXIT_OK


def cmd_fsa(cfg: RunConfig, out: Path) -> int:
    basis = enumerate_basis(cfg.constraint(), cfg.L, cfg.boundary())
    run = forward_scatter(split_hamiltonian(basis), convention=cfg.fsa_convention)
    run.write_csv(out / "fsa.csv")
    run.write_summary(out / "fsa_summary.json")
    s = run.summary()
    print(f"n_f={s['n_f']} delta_nf={_fmt(s['delta_nf'])} delta_total={_fmt(s['delta_total'])}")
    return EXIT_OK


def cmd_quench(cfg: RunConfig, out: Path) -> int:
    basis = enumerate_basis(cfg.constraint(), cfg.L, cfg.boundary())
    res = evolve_z2(build_hamiltonian(basis), basis, cfg.tmax, cfg.dt, observable=cfg.observable)
    res.write_csv(out / "quench.csv")
    _dump(out / "quench_summary.json", {"dim": basis.dim, "max_norm_error": np.abs(res.norm - 1).max(),
                                        "max_energy": np.abs(res.energy).max(), "steps": res.times.size - 1})
    print(f"dim={basis.dim} max_norm_error={_fmt(np.abs(res.norm - 1).max())}")
    return EXIT_OK


def cmd_entropy(cfg: RunConfig, out: Path) -> int:
    """Entanglement entropy of every eigenstate at ``--cut``; Model-I adds special-state profiles."""
    basis, sector, H = _full_space(cfg)
    eig = diagonalize(H, sector or basis, cfg.dense_limit)
    vectors = sector.lift_vectors(eig.vectors) if sector is not None else eig.vectors
    cut = basis.L // 2 if cfg.cut is None else cfg.cut
    S = entanglement_entropies(vectors, basis, cut)
    lines = ["index,energy,S_cut"] + [f"{i},{_fmt(e)},{_fmt(s)}" for i, (e, s) in enumerate(zip(eig.energies, S))]
    (out / "entropy.csv").write_text("\n".join(lines) + "\n")
    profiles = []
    if basis.constraint.name == "MODEL_I" and basis.boundary is Boundary.PBC:
        for n in (1, 2):
            if cfg.L < 5 * n or (n == 2 and cfg.L % 2):
                continue
            st = build_special_state(n, 1, cfg.L, basis)
            for c in range(1, cfg.L):
                p = schmidt_values(st.vector, basis, c)
                p = p[p > 1e-300]
                profiles.append(f"{n},{c},{_fmt(float(-(p * np.log(p)).sum()))}")
    if profiles:
        (out / "entropy_special.csv").write_text("\n".join(["n,cut,S"] + profiles) + "\n")
    print(f"states={eig.dim} cut={cut}")
    return EXIT_OK


def _verify_checks(cfg: RunConfig) -> list[dict]:
    c, bc = cfg.constraint(), cfg.boundary()
    basis = enumerate_basis(c, cfg.L, bc)
    H = build_hamiltonian(basis)
    checks = []

    def add(name, value, ok):
        checks.append({"check": name, "value": value, "pass": bool(ok)})

    add("dimension_transfer_matrix", basis.dim, basis.dim == count_dimension(c, cfg.L, bc))
    if c.name in ("MODEL_II", "MODEL_III") and bc is Boundary.OBC:
        cf = closed_form_dimension(c, cfg.L)
        add("dimension_closed_form", cf, round(cf) == basis.dim)
    add("symmetric", 0.0, H.is_symmetric())
    add("particle_hole_anticommutation", verify_anticommutation(H, basis), verify_anticommutation(H, basis) == 0)
    if basis.dim <= cfg.dense_limit:
        E = np.linalg.eigvalsh(H.toarray())
        err = float(np.abs(E + E[::-1]).max()) if E.size else 0.0
        add("pm_energy_symmetry", err, err < 1e-10)
    if c.name == "MODEL_I":
        v = commutator_max(conserved_Npp(basis), H)
        add("N_pp_conserved", v, v == 0)
        inert = enumerate_inert(c, cfg.L, bc, explicit=False).count
        if cfg.L >= 2:
            cf = inert_count_closed_form(cfg.L, bc)
            add("inert_closed_form", inert, inert == cf)
            add("inert_recurrence", inert, inert == inert_count_recurrence(cfg.L, bc))
        if bc is Boundary.PBC:
            checks.extend(_special_checks(basis, H))
    if c.name == "MODEL_II":
        v = max(commutator_max(conserved_Oi(basis, i), H) for i in range(cfg.L))
        add("O_i_conserved", v, v == 0)
        if bc is Boundary.PBC and cfg.L % 2 == 0:
            w = model2_label_weights(basis, z2_vector(basis))
            dev = max(abs(x - 2.0**-cfg.L) for x in w.values())
            add("z2_label_weights_uniform", dev, dev < 1e-14 and len(w) == 2**cfg.L)
    return checks


def _special_checks(basis, H) -> list[dict]:
    L, out = basis.L, []
    for n in (1, 2):
        if L < 5 * n or (n == 2 and L % 2):
            continue
        for sign in (1, -1):
            st = build_special_state(n, sign, L, basis)
            tag = f"special_n{n}_{'+' if sign > 0 else '-'}"
            res = float(np.linalg.norm(H @ st.vector - st.energy * st.vector))
            out.append({"check": f"{tag}_residual", "value": res, "pass": res < 1e-12})
            sz = float(magnetization(st.vector, basis))
            out.append({"check": f"{tag}_S_z", "value": sz, "pass": abs(sz - (L - 5 * n)) < 1e-10})
            if n == 1 and L >= 8:
                p = schmidt_values(st.vector, basis, L // 2)
                ref = special_state_schmidt_reference(1, L)
                err = float(np.abs(p[:ref.size] - ref).max() + p[ref.size:].sum())
                out.append({"check": f"{tag}_schmidt", "value": err, "pass": err < 1e-10})
                rdm = single_site_rdm(st.vector, basis, 0)
                err = float(np.abs(rdm - special_state_rdm_reference(L, sign)).max())
                out.append({"check": f"{tag}_rdm", "value": err, "pass": err < 1e-10})
    return out


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    checks = _verify_checks(cfg)
    _dump(out / "verify.json", {"checks": checks, "pass": all(ch["pass"] for ch in checks)})
    for ch in checks:
        print(f"{'PASS' if ch['pass'] else 'FAIL'} {ch['check']} {ch['value']}")
    ok = all(ch["pass"] for ch in checks)
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VERIFY


HANDLERS = {"basis": cmd_basis, "spectrum": cmd_spectrum, "fragments": cmd_fragments, "fsa": cmd_fsa,
            "quench": cmd_quench, "entropy": cmd_entropy, "verify": cmd_verify}


# --- argument parsing -------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", default="I", help="preset: I, II, III, free or pxp1 (default I)")
    p.add_argument("--forbid", default=None,
                   help="explicit forbidden pairs, e.g. '00,++'; overrides --model")
    p.add_argument("--L", type=int, default=8, help="number of sites (default 8)")
    p.add_argument("--bc", default="pbc", choices=["obc", "pbc"], help="boundary condition")
    p.add_argument("--sector", default=None,
                   help="symmetry sector k=<int>,inv=<+1|-1> (PBC only); omit for the full space")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--tmax", type=float, default=DEFAULT_TMAX, help="quench final time")
    p.add_argument("--dt", type=float, default=DEFAULT_DT, help="quench time step")
    p.add_argument("--fsa-convention", default="norm2", choices=["norm", "norm2"],
                   help="FSA error as plain or squared norm")
    p.add_argument("--observable", default="++", help="quench observable motif, site averaged (default ++)")
    p.add_argument("--cut", type=int, default=None, help="entanglement cut (default L/2)")
    p.add_argument("--dense-limit", type=int, default=DENSE_LIMIT, help="largest dense diagonalisation")
    p.add_argument("--workers", type=int, default=None, help="BLAS thread cap (default all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="constrained-pxp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        doc = HANDLERS[name].__doc__ or f"run the {name} analysis"
        _add_common(sub.add_parser(name, help=doc.splitlines()[0], description=doc))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(command=args.command, model=args.model, forbid=args.forbid, L=args.L, bc=args.bc,
                     sector=args.sector, out=args.out, tmax=args.tmax, dt=args.dt,
                     fsa_convention=args.fsa_convention, observable=args.observable, cut=args.cut, dense_limit=args.dense_limit,
                     workers=args.workers)


def run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg.write(out)
    workers = cfg.workers or os.cpu_count() or 1
    from threadpoolctl import threadpool_limits
    with threadpool_limits(limits=workers):
        return HANDLERS[cfg.command](cfg, out)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.L < 1:
            raise ConfigError("--L must be positive")
        if cfg.dt <= 0 or cfg.tmax < 0:
            raise ConfigError("--dt must be positive and --tmax non-negative")
        if cfg.workers is not None and cfg.workers < 1:
            raise ConfigError("--workers must be positive")
        cfg.constraint()
        if cfg.sector_spec() is not None and cfg.boundary() is Boundary.OBC:
            raise ConfigError("--sector needs --bc pbc")
        return run(cfg)
    except (LengthTooLarge, TooLargeForFullSpectrum, MethodInfeasible, MemoryError) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConstrainedPXPError, ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
