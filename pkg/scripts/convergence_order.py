"""Empirical order of the fixed-step RK4 integrator on both model systems.

Halves dt repeatedly and reports the drift of a conserved quantity for
each step size along with successive ratios (about 16 for fourth order).
"""

import argparse

import numpy as np

from reflectlax import toda, xxz
from reflectlax.poisson import integrate_flow


def toda_drift(dt, rng_seed):
    n = 3
    x0 = toda.TodaChart.random(n, np.random.default_rng(rng_seed)).coords
    H2 = toda.hamiltonian_observable(n, 2)
    traj = integrate_flow(toda.poisson_structure(n), toda.hamiltonian_observable(n, 1), x0, 2.0, dt,
                          invariants=[H2])
    return traj.drift(H2.label)


def xxz_drift(dt, rng_seed):
    t = 1.5
    c = xxz.ChainState.random(3, t, np.random.default_rng(rng_seed))
    traj = xxz.evolve_chain(c, xxz.local_hamiltonian_observable(t, c.xi_plus, c.xi_minus), 0.5, dt)
    return max(traj.drift("tau_1.3"), traj.drift("tau_1.7"))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()
    for name, fn, dt0 in (("toda n=3, drift of tr T^2", toda_drift, 0.04),
                          ("xxz N=3, drift of tau(z)", xxz_drift, 0.04)):
        print(name)
        prev = None
        for k in range(args.levels):
            dt = dt0 / 2**k
            d = fn(dt, args.seed)
            ratio = f"  ratio {prev / d:6.2f}" if prev else ""
            print(f"  dt={dt:.5f}  drift={d:.3e}{ratio}")
            prev = d


if __name__ == "__main__":
    main()
