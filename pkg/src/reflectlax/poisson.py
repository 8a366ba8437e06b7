"""Poisson brackets on explicit coordinate charts and Hamiltonian flows.

Brackets are ``{F, G}(s) = sum_ij Pi^ij(s) dF_i dG_j`` with gradients from
forward-mode dual numbers.  Flows use the convention ``df/dt = {H, f}``, so
with ``{p, q} = 1`` one gets ``dq/dt = dH/dp``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import dual
from .errors import DivergenceError, EvaluationError, InputError, StiffnessError
from .output import write_csv


@dataclass(frozen=True)
class PoissonStructure:
    """Coordinates plus a (possibly state-dependent) antisymmetric tensor.

    ``tensor_fn`` must accept dual-number coordinates so that derivatives of
    the tensor (needed for the Jacobi check) are available.
    """

    n_coords: int
    coord_labels: tuple
    tensor_fn: Callable
    name: str = ""

    def tensor(self, s) -> np.ndarray:
        s = _state(self, s)
        return np.asarray(dual.value(self.tensor_fn(s)), dtype=float)


@dataclass(frozen=True)
class Observable:
    fn: Callable
    label: str = ""

    def __call__(self, s):
        return self.fn(s)

    def value(self, s) -> float:
        return float(dual.value(self.fn(np.asarray(s, dtype=float))))

    def gradient(self, s) -> np.ndarray:
        return dual.gradient(self.fn, s)


def coordinate(ps: PoissonStructure, i: int) -> Observable:
    return Observable(lambda s, i=i: s[i], ps.coord_labels[i])


def constant(c: float, label="const") -> Observable:
    return Observable(lambda s: c, label)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    coord_labels: tuple
    invariants: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise InputError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise InputError("trajectory times must be strictly increasing")

    def drift(self, label: str) -> float:
        v = np.asarray(self.invariants[label])
        return float(np.abs(v - v[0]).max())

    def to_csv(self, path):
        labels = list(self.invariants)
        header = ["t", *self.coord_labels, *labels]
        inv = np.column_stack([self.invariants[k] for k in labels]) if labels else np.zeros((len(self.times), 0))
        rows = np.column_stack([self.times, self.states, inv])
        return write_csv(path, header, rows)


def _state(ps, s):
    s = np.asarray(s, dtype=float) if not dual.is_dual(s) else s
    if len(s) != ps.n_coords:
        raise InputError(f"state has {len(s)} coordinates, structure expects {ps.n_coords}")
    return s


def poisson_bracket(ps: PoissonStructure, F: Observable, G: Observable, s) -> float:
    s = _state(ps, s)
    gF, gG = F.gradient(s), G.gradient(s)
    return float(gF @ ps.tensor(s) @ gG)


def bracket_matrix(ps: PoissonStructure, grads_a: np.ndarray, grads_b: np.ndarray, s) -> np.ndarray:
    """All brackets between two families given their gradient rows."""
    return grads_a @ ps.tensor(s) @ grads_b.T


def hamiltonian_vector_field(ps: PoissonStructure, H: Observable, s) -> np.ndarray:
    """``v_j = {H, x_j}``."""
    s = _state(ps, s)
    v = ps.tensor(s).T @ H.gradient(s)
    if not np.all(np.isfinite(v)):
        raise EvaluationError(f"non-finite vector field for {H.label or 'H'}")
    return v


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_flow(
    ps: PoissonStructure,
    H: Observable,
    s0,
    t_final: float,
    dt: float,
    tol: float | None = None,
    invariants: Sequence[Observable] = (),
    output_times: Sequence[float] | None = None,
    stop_on: tuple = (),
    max_steps: int = 1_000_000,
) -> Trajectory:
    """Classic RK4 with fixed step ``dt``; with ``tol`` each step is checked
    against two half steps and halved until the difference is below ``tol``.

    Without ``output_times`` every accepted step is recorded.  Exceptions of
    a type listed in ``stop_on`` end the run early: the trajectory so far is
    returned with ``flags["stopped_at"]`` and ``flags["stop_reason"]`` set.
    More than ``max_steps`` step attempts raises StiffnessError: a tolerance
    below roundoff can be met only by steps so small that the run never ends.
    """
    if t_final <= 0:
        raise InputError("t_final must be positive")
    if dt <= 0:
        raise InputError("dt must be positive")
    y = np.array(_state(ps, s0), dtype=float)
    f = lambda x: hamiltonian_vector_field(ps, H, x)

    if output_times is None:
        marks = None
    else:
        marks = [float(t) for t in output_times if 0 < t <= t_final]
        if any(b <= a for a, b in zip(marks, marks[1:])):
            raise InputError("output_times must be increasing")
        if not marks or marks[-1] < t_final:
            marks.append(float(t_final))

    times, states = [0.0], [y.copy()]
    t = 0.0
    h = dt
    next_mark = 0
    flags = {}
    attempts = 0
    while t < t_final * (1 - 1e-15):
        target = t_final if marks is None else marks[next_mark]
        step = min(h, target - t)
        while True:
            attempts += 1
            if attempts > max_steps:
                raise StiffnessError(f"more than {max_steps} step attempts by t={t:.6g}")
            if step < 1e-14:
                raise StiffnessError(f"step size underflow at t={t:.6g}")
            try:
                full = _rk4_step(f, y, step)
                half = None if tol is None else _rk4_step(f, _rk4_step(f, y, 0.5 * step), 0.5 * step)
            except stop_on as exc:
                flags = {"stopped_at": t, "stop_reason": str(exc)}
                y_new = None
                break
            if tol is None:
                y_new = full
                break
            err = np.abs(half - full).max()
            if err <= tol:
                y_new = half
                break
            step *= 0.5
            h = step
        if y_new is None:
            if marks is not None and times[-1] < t:
                times.append(t)
                states.append(y.copy())
            break
        if not np.all(np.isfinite(y_new)):
            raise DivergenceError(f"state became non-finite near t={t:.6g}")
        y = y_new
        t_reached = t + step
        hit = marks is not None and abs(t_reached - marks[next_mark]) <= 1e-12 * max(1.0, t_final)
        t = marks[next_mark] if hit else t_reached
        if marks is None or hit:
            times.append(t)
            states.append(y.copy())
            if hit:
                next_mark += 1
                if next_mark == len(marks):
                    break

    states = np.array(states)
    inv = {obs.label: np.array([obs.value(x) for x in states]) for obs in invariants}
    return Trajectory(np.array(times), states, tuple(ps.coord_labels), inv, flags)


@dataclass
class CommutationReport:
    labels: list
    matrix: np.ndarray

    def max_offdiag(self) -> float:
        m = self.matrix.copy()
        np.fill_diagonal(m, 0.0)
        return float(m.max(initial=0.0))

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "matrix": self.matrix.tolist()}


def commutation_report(
    ps: PoissonStructure, observables: Sequence[Observable], samples, workers: int | None = None
) -> CommutationReport:
    """Entry ``(i, j)``: max over samples of ``|{F_i, F_j}|``."""
    samples = [np.asarray(s, dtype=float) for s in samples]
    if not samples:
        raise InputError("commutation_report needs at least one sample state")

    def at(s):
        G = np.array([F.gradient(s) for F in observables])
        return np.abs(bracket_matrix(ps, G, G, s))

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            mats = list(pool.map(at, samples))
    else:
        mats = [at(s) for s in samples]
    m = np.max(np.array(mats), axis=0)
    m = np.maximum(m, m.T)
    np.fill_diagonal(m, 0.0)
    return CommutationReport([F.label for F in observables], m)


def independence_rank(ps: PoissonStructure, observables: Sequence[Observable], s, rel_tol=1e-8) -> int:
    s = _state(ps, s)
    G = np.array([F.gradient(s) for F in observables])
    sv = np.linalg.svd(G, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def jacobi_defect(ps: PoissonStructure, s) -> float:
    """Max of ``Pi^il d_l Pi^jk + cyclic`` over coordinate triples."""
    s = _state(ps, s)
    out = ps.tensor_fn(dual.variables(s))
    if not dual.is_dual(out):
        return 0.0
    P, dP = out.val, out.grad
    cyc = (
        np.einsum("il,jkl->ijk", P, dP)
        + np.einsum("jl,kil->ijk", P, dP)
        + np.einsum("kl,ijl->ijk", P, dP)
    )
    return float(np.abs(cyc).max())


def sample_states(base, half_width, count: int, rng: np.random.Generator, reject=None) -> list:
    """Uniform draws from the hypercube ``base +- half_width``; ``reject(s)``
    discards unwanted draws (e.g. ``k_n = 0``)."""
    base = np.asarray(base, dtype=float)
    out = []
    while len(out) < count:
        s = base + rng.uniform(-1.0, 1.0, size=base.shape) * half_width
        if reject is None or not reject(s):
            out.append(s)
    return out
