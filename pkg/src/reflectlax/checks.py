"""Named verification checks and the report they feed.

A check returns one or more :class:`CheckRow` values.  Each row passes iff
``defect <= tolerance``; a check passes iff all its rows do.  Tolerances can
be overridden per row name (``check.row``).
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__, algebras, lie_tensor, toda, xxz
from .errors import ConfigError, ReflectLaxError
from .laurent import LaurentMatrix, Z, ZINV
from .poisson import commutation_report, independence_rank, integrate_flow, poisson_bracket


@dataclass(frozen=True)
class CheckRow:
    name: str
    defect: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.defect) and self.defect <= self.tolerance)

    def to_dict(self) -> dict:
        d = {"name": self.name, "defect": float(self.defect), "tolerance": float(self.tolerance),
             "pass": self.passed}
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass(frozen=True)
class Check:
    name: str
    kind: str
    fn: Callable
    time_limit: float
    summary: str


CHECKS: dict = {}


def register(name, kind, time_limit, summary):
    def deco(fn):
        CHECKS[name] = Check(name, kind, fn, time_limit, summary)
        return fn
    return deco


class Tolerances:
    """Row-name lookup with user overrides; remembers which names were used."""

    def __init__(self, overrides=None):
        self.overrides = dict(overrides or {})
        self.seen = set()

    def __call__(self, name, default):
        self.seen.add(name)
        return float(self.overrides.get(name, default))


def check_rng(seed: int, name: str) -> np.random.Generator:
    # independent stream per check, stable across registry reordering
    key = int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "little")
    return np.random.default_rng([int(seed) & (2**64 - 1), key])


# Lie-algebra checks -----------------------------------------------------------------


@register("cre_certification", "verify_lie", 1.0,
          "CRE of the skew r-matrix under the Cartan involution, sl2..sl5")
def _cre_certification(rng, tol):
    worst, nonzero = 0.0, 0
    for n in (2, 3, 4, 5):
        alg = algebras.sl(n)
        r = algebras.skew_r_matrix(alg)
        theta = algebras.cartan_involution(alg)
        worst = max(worst, lie_tensor.max_abs(lie_tensor.cre_defect(alg, r, theta)))
        exact = lie_tensor.cre_defect(alg, r, theta, exact=True)
        nonzero += sum(1 for v in exact.ravel() if v != 0)
    return [
        CheckRow("cre_certification.float", worst, tol("cre_certification.float", 1e-12)),
        CheckRow("cre_certification.exact_nonzero_entries", nonzero,
                 tol("cre_certification.exact_nonzero_entries", 0)),
    ]


@register("cybe_mcybe", "verify_lie", 1.0,
          "CYBE and modified CYBE for the standard sl2, sl3 r-matrices")
def _cybe_mcybe(rng, tol):
    cy = mc = 0.0
    for n in (2, 3):
        alg = algebras.sl(n)
        r = algebras.standard_r_matrix(alg)
        cy = max(cy, lie_tensor.max_abs(lie_tensor.cybe_defect(alg, r)))
        for _ in range(100):
            x, y = rng.standard_normal(alg.dim), rng.standard_normal(alg.dim)
            mc = max(mc, lie_tensor.max_abs(lie_tensor.mcybe_defect(alg, r, x, y)))
    return [
        CheckRow("cybe_mcybe.cybe", cy, tol("cybe_mcybe.cybe", 1e-10)),
        CheckRow("cybe_mcybe.mcybe", mc, tol("cybe_mcybe.mcybe", 1e-10)),
    ]


COIDEAL_CASES = (("sl2", "theta"), ("sl3", "theta"), ("sl3", "cyclic"), ("sl4", "theta"),
                 ("sl4", "cyclic"), ("sl2+sl2", "swap"), ("gl2", "theta"))


@register("coideal_equivalence", "verify_lie", 5.0,
          "C_sigma(r) = 0 exactly when the pp block of r vanishes (200 random r)")
def _coideal_equivalence(rng, tol):
    zero_tol = tol("coideal_equivalence.zero_threshold", 1e-10)
    cases = [(algebras.algebra(a), s) for a, s in COIDEAL_CASES]
    cases = [(alg, algebras.automorphism(s, alg)) for alg, s in cases]
    mismatches = 0
    for i in range(200):
        alg, sigma = cases[i % len(cases)]
        r = rng.standard_normal((alg.dim, alg.dim))
        if i % 2 == 0:
            r = r - np.real(lie_tensor.r_block_decomposition(alg, r, sigma).pp)
        c = lie_tensor.max_abs(lie_tensor.cre_defect(alg, r, sigma))
        p = lie_tensor.r_block_decomposition(alg, r, sigma).pp_norm
        mismatches += (c <= zero_tol) != (p <= zero_tol)
    return [CheckRow("coideal_equivalence.mismatches", mismatches,
                     tol("coideal_equivalence.mismatches", 0),
                     f"200 samples over {len(cases)} (algebra, automorphism) presets")]


def lie_suite(alg, sigma, samples, rng, tol):
    """cre / cybe / mcybe rows for one (algebra, automorphism) pair."""
    r_hat = algebras.skew_r_matrix(alg)
    r_std = algebras.standard_r_matrix(alg)
    cre = lie_tensor.max_abs(lie_tensor.cre_defect(alg, r_hat, sigma))
    cy = lie_tensor.max_abs(lie_tensor.cybe_defect(alg, r_std))
    mc = 0.0
    for _ in range(samples):
        x, y = rng.standard_normal(alg.dim), rng.standard_normal(alg.dim)
        mc = max(mc, lie_tensor.max_abs(lie_tensor.mcybe_defect(alg, r_std, x, y)))
    return [
        CheckRow("cre_defect", cre, tol("cre_defect", 1e-12), f"{alg.name}, {sigma.label}"),
        CheckRow("cybe_defect", cy, tol("cybe_defect", 1e-10), alg.name),
        CheckRow("mcybe_defect", mc, tol("mcybe_defect", 1e-10), f"{samples} random pairs"),
    ]


# Toda checks ------------------------------------------------------------------------


@register("toda_commutativity", "toda", 10.0,
          "tr T^k pairwise Poisson-commute and are independent, n = 4")
def _toda_commutativity(rng, tol):
    n = 4
    ps = toda.poisson_structure(n)
    obs = [toda.hamiltonian_observable(n, k) for k in range(1, n + 1)]
    samples = toda.random_chart_samples(n, 50, rng)
    # float64 brackets cancel terms of size ~1e9 and bottom out near 1e-8, so
    # the pass/fail figure is taken in 40-digit arithmetic
    rep = commutation_report(ps, obs, samples)
    worst = 0.0
    for s in samples:
        g = toda.trace_power_gradients_mp(s, n, range(1, n + 1))
        for i in range(n):
            for j in range(i + 1, n):
                worst = max(worst, abs(float(toda.canonical_bracket_mp(g[i], g[j], n))))
    ranks = [independence_rank(ps, obs, s) for s in samples[:5]]
    return [
        CheckRow("toda_commutativity.max_bracket", worst,
                 tol("toda_commutativity.max_bracket", 1e-9),
                 f"40-digit evaluation; float64 engine gives {rep.max_offdiag():.3g}"),
        CheckRow("toda_commutativity.rank_deficit", max(n - r for r in ranks),
                 tol("toda_commutativity.rank_deficit", 0), f"ranks {ranks}"),
    ]


def rk4_vs_factorization(n, m, kappa, x0, times, dt=1e-3):
    ps = toda.poisson_structure(n)
    H = toda.hamiltonian_observable(n, m)
    traj = integrate_flow(ps, H, x0, max(times), dt, output_times=times)
    T0 = toda.monodromy_matrix(x0, n)
    worst = 0.0
    for t, x in zip(traj.times[1:], traj.states[1:]):
        exact = toda.factorization_solve(T0, m, t, kappa)
        worst = max(worst, float(np.abs(toda.monodromy_matrix(x, n) - exact).max()))
    return worst


@register("toda_factorization", "toda", 30.0,
          "kappa calibration, then Iwasawa factorisation vs RK4, n = 1, 2, 3")
def _toda_factorization(rng, tol):
    fits = {n: toda.calibrate_kappa(n, rng=rng, count=10) for n in (1, 2, 3)}
    resid = max(f.residual for f in fits.values())
    spread = max(abs(f.kappa - fits[1].kappa) for f in fits.values())
    err = 0.0
    for n, fit in fits.items():
        x0 = toda.TodaChart.random(n, rng).coords
        err = max(err, rk4_vs_factorization(n, 1, fit.kappa, x0, [0.1, 0.5, 1.0]))
    return [
        CheckRow("toda_factorization.kappa_residual", resid,
                 tol("toda_factorization.kappa_residual", 1e-8), f"kappa={fits[1].kappa!r}"),
        CheckRow("toda_factorization.kappa_spread", spread, tol("toda_factorization.kappa_spread", 1e-8)),
        CheckRow("toda_factorization.max_entry_error", err,
                 tol("toda_factorization.max_entry_error", 1e-6)),
    ]


def eigen_drift_rows(n, x0, t_final, dt, tol, prefix, fact_tol=1e-12, rk_tol=1e-8, step=1.0):
    T0 = toda.monodromy_matrix(x0, n)
    ev0 = toda.spectral_invariants(T0).eigenvalues
    times = list(np.arange(step, t_final + 0.5 * step, step))
    fd = max(
        float(np.abs(toda.spectral_invariants(toda.factorization_solve(T0, 1, t)).eigenvalues - ev0).max())
        for t in times
    )
    traj = integrate_flow(toda.poisson_structure(n), toda.hamiltonian_observable(n, 1), x0,
                          t_final, dt, output_times=times)
    rd = max(
        float(np.abs(toda.spectral_invariants(toda.monodromy_matrix(x, n)).eigenvalues - ev0).max())
        for x in traj.states
    )
    return [
        CheckRow(f"{prefix}.factorization_drift", fd, tol(f"{prefix}.factorization_drift", fact_tol)),
        CheckRow(f"{prefix}.rk4_drift", rd, tol(f"{prefix}.rk4_drift", rk_tol), f"dt={dt}"),
    ]


@register("toda_isospectrality", "toda", 30.0,
          "eigenvalue drift of T(t) over t in [0, 10], n = 3")
def _toda_isospectrality(rng, tol):
    x0 = toda.TodaChart.random(3, rng).coords
    return eigen_drift_rows(3, x0, 10.0, 2e-3, tol, "toda_isospectrality")


# XXZ checks -------------------------------------------------------------------------


def random_site(rng):
    return xxz.SiteState(rng.uniform(0.5, 2.0), rng.uniform(-2, 2), rng.uniform(-2, 2))


def laurent_identity_defect(s: xxz.SiteState) -> float:
    L = xxz.lax_matrix(s)
    rhs = LaurentMatrix.scalar(s.omega - Z * Z - ZINV * ZINV)
    return (L @ L.reflect() - rhs).max_abs_coeff()


@register("xxz_laurent", "xxz", 1.0, "L(z) L(1/z) = (omega - z^2 - z^-2) Id coefficientwise")
def _xxz_laurent(rng, tol):
    worst = max(laurent_identity_defect(random_site(rng)) for _ in range(100))
    return [CheckRow("xxz_laurent.max_coefficient", worst, tol("xxz_laurent.max_coefficient", 1e-13))]


def spectral_pair(rng, lo=1.05, hi=1.6, gap=0.05):
    while True:
        z, w = rng.uniform(lo, hi, 2)
        if abs(z - w) > gap:
            return float(z), float(w)


def random_chain(rng, N):
    t = rng.uniform(1.2, 2.0)
    return xxz.ChainState.random(N, t, rng, rng.uniform(1.5, 3.0), rng.uniform(1.5, 3.0))


@register("xxz_reflection_algebra", "xxz", 60.0,
          "Sklyanin bracket (one site) and reflection algebra (N = 2)")
def _xxz_reflection_algebra(rng, tol):
    sk = refl = 0.0
    for _ in range(20):
        c = random_chain(rng, 2)
        d = xxz.reflection_algebra_check(c, *spectral_pair(rng))
        sk, refl = max(sk, d["sklyanin"]), max(refl, d["reflection"])
    return [
        CheckRow("xxz_reflection_algebra.sklyanin", sk, tol("xxz_reflection_algebra.sklyanin", 1e-8)),
        CheckRow("xxz_reflection_algebra.reflection", refl,
                 tol("xxz_reflection_algebra.reflection", 1e-8)),
    ]


def transfer_bracket(c: xxz.ChainState, z, w) -> float:
    ps = xxz.poisson_structure(c.N)
    return abs(poisson_bracket(ps, xxz.transfer_observable(z, c.xi_plus, c.xi_minus),
                               xxz.transfer_observable(w, c.xi_plus, c.xi_minus), c.coords))


@register("xxz_transfer_commutativity", "xxz", 60.0, "{tau(z), tau(w)} = 0 for N = 3")
def _xxz_transfer(rng, tol):
    worst = max(transfer_bracket(random_chain(rng, 3), *spectral_pair(rng)) for _ in range(20))
    return [CheckRow("xxz_transfer_commutativity.max_bracket", worst,
                     tol("xxz_transfer_commutativity.max_bracket", 1e-8))]


def product_formula_spread(rng, N, t, xi_plus, xi_minus, count=100):
    ratios = []
    for _ in range(count):
        c = xxz.ChainState.random(N, t, rng, xi_plus, xi_minus)
        ratios.append(np.exp(xxz.local_hamiltonian(c)) / xxz.transfer_value(c, t))
    ratios = np.array(ratios)
    return float(np.ptp(ratios) / abs(ratios.mean())), float(ratios.mean())


def chain_drift_rows(c, H, t_final, dt, tol, prefix, omega_tol=1e-8, tau_tol=1e-6,
                     sample_z=(1.3, 1.7)):
    traj = xxz.evolve_chain(c, H, t_final, dt, sample_z=sample_z)
    om = max(traj.drift(f"omega_{n}") for n in range(1, c.N + 1))
    tau = max(traj.drift(k) for k in traj.invariants if k.startswith("tau_"))
    reached = float(traj.times[-1])
    detail = traj.flags.get("stop_reason", "")
    return traj, [
        CheckRow(f"{prefix}.omega_drift", om, tol(f"{prefix}.omega_drift", omega_tol)),
        CheckRow(f"{prefix}.tau_drift", tau, tol(f"{prefix}.tau_drift", tau_tol)),
        CheckRow(f"{prefix}.time_short_of_target", t_final - reached,
                 tol(f"{prefix}.time_short_of_target", 0.0),
                 f"log-domain exit at t={reached:.6g}: {detail}" if detail else ""),
    ]


@register("xxz_local_hamiltonian", "xxz", 120.0,
          "product formula for the local Hamiltonian and its flow, N = 3, t_final = 5")
def _xxz_local_hamiltonian(rng, tol):
    t, xp, xm = 1.5, 2.0, 2.0
    spread, mean = product_formula_spread(rng, 3, t, xp, xm)
    c = xxz.ChainState.random(3, t, rng, xp, xm)
    H = xxz.local_hamiltonian_observable(t, xp, xm)
    _, rows = chain_drift_rows(c, H, 5.0, 5e-3, tol, "xxz_local_hamiltonian")
    return [
        CheckRow("xxz_local_hamiltonian.ratio_spread", spread,
                 tol("xxz_local_hamiltonian.ratio_spread", 1e-9),
                 f"ratio {mean!r}, predicted {xxz.product_formula_constant(t)!r}"),
        *rows,
    ]


@register("semiclassical_limit", "xxz", 1.0, "f(z) R(z) = 1 + h r(z) + O(h^2) at z = 2")
def _semiclassical(rng, tol):
    fit = xxz.semiclassical_check(2.0, [1e-2, 10**-2.5, 1e-3])
    return [CheckRow("semiclassical_limit.slope_offset", abs(fit.slope - 2.0),
                     tol("semiclassical_limit.slope_offset", 0.1), f"slope {fit.slope!r}")]


# reports ----------------------------------------------------------------------------


def config_digest(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class VerificationReport:
    artifact_version: str
    config_digest: str
    checks: list = field(default_factory=list)  # CheckRow
    timings: dict = field(default_factory=dict)  # wall seconds, kept out of to_dict()
    errors: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.errors and all(r.passed for r in self.checks)

    def to_dict(self) -> dict:
        return {
            "artifact_version": self.artifact_version,
            "config_digest": self.config_digest,
            "checks": [r.to_dict() for r in self.checks],
            "errors": dict(sorted(self.errors.items())),
            "pass": self.passed,
        }


def run_checks(names, seed: int, overrides=None, digest: str = "", extra=()) -> VerificationReport:
    """Run ``extra`` suites (``(name, fn)`` pairs) and then registered checks.

    Library errors are recorded under the owning check name instead of
    aborting the run.
    """
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown check(s) {unknown}; known: {sorted(CHECKS)}")
    tol = Tolerances(overrides)
    report = VerificationReport(__version__, digest)
    jobs = list(extra) + [(n, CHECKS[n].fn) for n in names]
    for name, fn in jobs:
        start = time.perf_counter()
        try:
            report.checks.extend(fn(check_rng(seed, name), tol))
        except ReflectLaxError as exc:
            report.errors[name] = f"{type(exc).__name__}: {exc}"
        report.timings[name] = time.perf_counter() - start
    stray = set(tol.overrides) - tol.seen
    if stray:
        raise ConfigError(f"tolerance override(s) {sorted(stray)} match no check row")
    return report
