"""Command line entry point: ``reflectlax {verify,simulate,presets,calibrate}``.

Exit status: 0 all checks pass, 1 some check fails, 2 bad config or
arguments, 3 a library error outside any check.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import algebras, checks, toda, xxz
from .checks import CheckRow, VerificationReport, config_digest, run_checks
from .config import ExperimentConfig, load_config, preset, preset_names, with_overrides
from .errors import ConfigError, InputError, ReflectLaxError
from .output import write_csv, write_json

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ERROR = 0, 1, 2, 3


def _no_stray(tol: checks.Tolerances):
    stray = set(tol.overrides) - tol.seen
    if stray:
        raise ConfigError(f"tolerance override(s) {sorted(stray)} match no check row")


def _rng(cfg: ExperimentConfig, section_seed, stream: str):
    seed = cfg.seed if section_seed is None else section_seed
    return checks.check_rng(seed, stream)


# verify_lie -------------------------------------------------------------------------


def _lie_pair(cfg):
    sec = cfg.lie
    alg = algebras.load_algebra(sec.algebra_file) if sec.algebra_file else algebras.algebra(sec.algebra)
    return alg, algebras.automorphism(sec.automorphism, alg)


def _lie_suite(cfg):
    def fn(rng, tol):
        alg, sigma = _lie_pair(cfg)
        struct = max(alg.structure_defects().values())
        d = sigma.defects(alg)
        auto = max(d["homomorphism"], d.get("order", 0.0))
        rows = [
            CheckRow("structure_defect", struct, tol("structure_defect", 1e-12), alg.name),
            CheckRow("automorphism_defect", auto, tol("automorphism_defect", 1e-12), sigma.label),
        ]
        return rows + checks.lie_suite(alg, sigma, cfg.lie.samples, rng, tol)

    return fn


def default_check_names(cfg: ExperimentConfig) -> list:
    if cfg.checks is not None:
        return list(cfg.checks)
    return [name for name, c in checks.CHECKS.items() if c.kind == cfg.kind]


def verify(cfg: ExperimentConfig) -> VerificationReport:
    extra = [("lie_suite", _lie_suite(cfg))] if cfg.kind == "verify_lie" and cfg.checks is None else []
    return run_checks(default_check_names(cfg), cfg.seed, cfg.tolerances,
                      config_digest(cfg.digest_fields()), extra)


# toda --------------------------------------------------------------------------------


def toda_initial(cfg) -> np.ndarray:
    sec = cfg.toda
    if (sec.p is None) != (sec.q is None):
        raise ConfigError("toda: give both p and q, or neither")
    if sec.p is not None:
        chart = toda.TodaChart(sec.n, np.array(sec.p, float), np.array(sec.q, float))
    else:
        chart = toda.TodaChart.random(sec.n, _rng(cfg, sec.random_seed, "toda.initial"))
    return chart.coords


def simulate_toda(cfg, out: Path) -> VerificationReport:
    from .poisson import integrate_flow

    sec = cfg.toda
    x0 = toda_initial(cfg)
    tol = checks.Tolerances(cfg.tolerances)
    report = VerificationReport(checks.__version__, config_digest(cfg.digest_fields()))
    start = time.perf_counter()
    if sec.kappa is None:
        fit = toda.calibrate_kappa(sec.n, rng=_rng(cfg, None, "toda.calibrate"), m=sec.m)
        kappa = fit.kappa
        report.checks.append(CheckRow("kappa_residual", fit.residual,
                                      tol("kappa_residual", 1e-8), f"kappa={kappa!r}"))
    else:
        kappa = sec.kappa
    report.timings["calibrate"] = time.perf_counter() - start

    start = time.perf_counter()
    ps = toda.poisson_structure(sec.n)
    traj = integrate_flow(ps, toda.hamiltonian_observable(sec.n, sec.m), x0, sec.t_final, sec.dt,
                          output_times=sec.output_times)
    report.timings["integrate"] = time.perf_counter() - start
    traj.to_csv(out / "trajectory.csv")

    size = sec.n + 1
    inv_rows = []
    for t, x in zip(traj.times, traj.states):
        si = toda.spectral_invariants(toda.monodromy_matrix(x, sec.n))
        inv_rows.append([t, *si.eigenvalues, *si.traces])
    header = ["t", *(f"eig_{i}" for i in range(1, size + 1)),
              *("trT" if k == 1 else f"trT{k}" for k in range(1, size + 1))]
    write_csv(out / "invariants.csv", header, inv_rows)

    inv = np.array(inv_rows)
    eig_drift = float(np.abs(inv[:, 1:size + 1] - inv[0, 1:size + 1]).max())
    T0 = toda.monodromy_matrix(x0, sec.n)
    exact = toda.factorization_solve(T0, sec.m, float(traj.times[-1]), kappa)
    fact_err = float(np.abs(toda.monodromy_matrix(traj.states[-1], sec.n) - exact).max())
    report.checks += [
        CheckRow("isospectrality", eig_drift, tol("isospectrality", 1e-8),
                 "max eigenvalue drift along the RK4 trajectory"),
        CheckRow("factorization_agreement", fact_err, tol("factorization_agreement", 1e-6),
                 f"entrywise at t={traj.times[-1]:.6g}"),
    ]
    _no_stray(tol)
    return report


# xxz ----------------------------------------------------------------------------------


def xxz_initial(cfg) -> xxz.ChainState:
    sec = cfg.xxz
    if sec.t_n is not None and len(sec.t_n) != sec.N:
        raise ConfigError("xxz.t_n: need one leaf parameter per site")
    ts = sec.t_n if sec.t_n is not None else [sec.t] * sec.N if sec.t is not None else None
    if sec.sites is not None:
        if len(sec.sites) != sec.N or any(len(s) != 3 for s in sec.sites):
            raise ConfigError("xxz.sites: need N triples [k, e, f]")
        sites = tuple(xxz.SiteState(*map(float, s)) for s in sec.sites)
        return xxz.ChainState(sites, sec.xi_plus, sec.xi_minus, ts)
    if ts is None:
        raise ConfigError("xxz: random initial sites need a leaf parameter t or t_n")
    return xxz.ChainState.random(sec.N, ts, _rng(cfg, sec.random_seed, "xxz.initial"),
                                 sec.xi_plus, sec.xi_minus)


def xxz_hamiltonian(cfg, chain):
    sec = cfg.xxz
    if sec.hamiltonian == "local":
        return xxz.local_hamiltonian_observable(chain.homogeneous_t, sec.xi_plus, sec.xi_minus)
    if sec.hamiltonian == "transfer":
        return xxz.transfer_observable(sec.hamiltonian_z, sec.xi_plus, sec.xi_minus)
    if sec.hamiltonian.startswith("omega_"):
        n = int(sec.hamiltonian[6:])
        if not 1 <= n <= chain.N:
            raise ConfigError(f"xxz.hamiltonian: no site {n}")
        return xxz.omega_observable(n)
    raise ConfigError(f"xxz.hamiltonian: expected local, transfer or omega_<n>, got {sec.hamiltonian!r}")


def simulate_xxz(cfg, out: Path) -> VerificationReport:
    sec = cfg.xxz
    chain = xxz_initial(cfg)
    H = xxz_hamiltonian(cfg, chain)
    tol = checks.Tolerances(cfg.tolerances)
    report = VerificationReport(checks.__version__, config_digest(cfg.digest_fields()))
    if len(sec.sample_z) < 2:
        raise ConfigError("xxz.sample_z: need at least two spectral points")
    z, w = sec.sample_z[0], sec.sample_z[1]

    start = time.perf_counter()
    laurent = max(checks.laurent_identity_defect(s) for s in chain.sites)
    alg = xxz.reflection_algebra_check(chain, z, w)
    report.checks += [
        CheckRow("laurent_identity", laurent, tol("laurent_identity", 1e-13)),
        CheckRow("sklyanin_bracket", alg["sklyanin"], tol("sklyanin_bracket", 1e-8)),
        CheckRow("reflection_algebra", alg["reflection"], tol("reflection_algebra", 1e-8)),
        CheckRow("transfer_commutativity", checks.transfer_bracket(chain, z, w),
                 tol("transfer_commutativity", 1e-8)),
    ]
    if sec.hamiltonian == "local":
        t = chain.homogeneous_t
        ratio = np.exp(xxz.local_hamiltonian(chain)) / xxz.transfer_value(chain, t)
        pred = xxz.product_formula_constant(t)
        report.checks.append(CheckRow("product_formula", abs(ratio / pred - 1.0),
                                      tol("product_formula", 1e-9)))
    report.timings["static_checks"] = time.perf_counter() - start

    start = time.perf_counter()
    traj, rows = checks.chain_drift_rows(chain, H, sec.t_final, sec.dt, tol, "evolution",
                                          sample_z=tuple(sec.sample_z))
    report.timings["integrate"] = time.perf_counter() - start
    report.checks += rows
    traj.to_csv(out / "trajectory.csv")
    _no_stray(tol)
    return report


# entry point -------------------------------------------------------------------------


def _parse_tol(items) -> dict:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ConfigError(f"--tol expects name=value, got {item!r}")
        try:
            out[name] = float(value)
        except ValueError:
            raise ConfigError(f"--tol {name}: {value!r} is not a number") from None
    return out


def _load(args) -> ExperimentConfig:
    if (args.config is None) == (args.preset is None):
        raise ConfigError("give exactly one of --config or --preset")
    cfg = load_config(args.config) if args.config else preset(args.preset)
    return with_overrides(cfg, args.seed, args.out, _parse_tol(args.tol))


def _emit(report: VerificationReport, out: Path, name: str) -> int:
    write_json(out / name, report.to_dict())
    write_json(out / "timings.json", report.timings)
    for row in report.checks:
        print(f"{'PASS' if row.passed else 'FAIL'}  {row.name}  defect={row.defect:.3e}  tol={row.tolerance:.1e}"
              + (f"  ({row.detail})" if row.detail else ""))
    for name, msg in sorted(report.errors.items()):
        print(f"ERROR {name}: {msg}")
    print(f"overall: {'PASS' if report.passed else 'FAIL'}  ({out / name})")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    cfg = _load(args)
    return _emit(verify(cfg), Path(cfg.output_dir), "report.json")


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = Path(cfg.output_dir)
    if cfg.kind == "toda":
        return _emit(simulate_toda(cfg, out), out, "summary.json")
    if cfg.kind == "xxz":
        return _emit(simulate_xxz(cfg, out), out, "verification.json")
    raise ConfigError("verify_lie configs have nothing to simulate; use `verify`")


def cmd_calibrate(args) -> int:
    cfg = _load(args)
    if cfg.kind != "toda":
        raise ConfigError("calibrate needs a toda config")
    fit = toda.calibrate_kappa(cfg.toda.n, rng=_rng(cfg, None, "toda.calibrate"), m=cfg.toda.m)
    doc = {"n": cfg.toda.n, "m": cfg.toda.m, "kappa": fit.kappa, "residual": fit.residual,
           "samples": fit.samples}
    write_json(Path(cfg.output_dir) / "calibration.json", doc)
    print(f"kappa = {fit.kappa!r}  (residual {fit.residual:.3g} over {fit.samples} charts)")
    return EXIT_OK


def list_presets() -> str:
    lines = ["algebras:"]
    lines += [f"  {name}" for name in sorted(algebras.ALGEBRA_PRESETS)]
    lines.append("automorphisms:")
    lines += [f"  {name}" for name in sorted(algebras.AUTOMORPHISM_PRESETS)]
    lines.append("configs:")
    for name in preset_names():
        cfg = preset(name)
        what = checks.CHECKS[name].summary if name in checks.CHECKS else "example config"
        lines.append(f"  {name}  [{cfg.kind}]  {what}")
    return "\n".join(lines) + "\n"


def cmd_presets(args) -> int:
    sys.stdout.write(list_presets())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reflectlax", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, fn, help_ in (
        ("verify", cmd_verify, "run verification checks and write report.json"),
        ("simulate", cmd_simulate, "integrate a toda or xxz config and write CSV + JSON"),
        ("calibrate", cmd_calibrate, "fit the Toda flow constant kappa"),
    ):
        p = sub.add_parser(verb, help=help_)
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--preset", help="named preset (see `presets`)")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed; overrides the config")
        p.add_argument("--out", help="output directory; overrides the config")
        p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override")
        p.set_defaults(fn=fn)
    p = sub.add_parser("presets", help="list bundled algebras, automorphisms and configs")
    p.set_defaults(fn=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReflectLaxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
