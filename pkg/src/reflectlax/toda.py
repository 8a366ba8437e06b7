"""Symmetric Lax representation of the open Coxeter-Toda lattice.

Phase space: canonical ``(p_1..p_n, q_1..q_n)`` with ``{p_k, q_k} = 1`` and
boundary values ``q_0 = q_{n+1} = 0``.  The upper-bidiagonal factor ``X`` has
diagonal ``a_k = exp(q_{k-1} - q_k)`` (k = 1..n+1) and superdiagonal
``b_k = exp(p_k)``; the reflection monodromy matrix is ``T = X X^T``.

Flow normalisation: under ``df/dt = {H, f}`` with ``H = tr T^m`` one has
``dT/dt = [lax_generator(T, m, kappa), T]`` for the measured constant
``kappa`` (see :func:`calibrate_kappa`; it comes out as -2).
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.linalg

from . import dual
from .errors import (
    ConditioningError,
    ConventionMismatchError,
    DomainError,
    InputError,
    NumericalError,
    RangeError,
)
from .poisson import Observable, PoissonStructure, hamiltonian_vector_field

KAPPA = -2.0


@dataclass(frozen=True)
class TodaChart:
    n: int
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if self.n < 1 or p.shape != (self.n,) or q.shape != (self.n,):
            raise InputError("TodaChart needs n >= 1 and p, q of length n")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise InputError("non-finite chart coordinates")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_coords(cls, x):
        x = np.asarray(x, dtype=float)
        n = len(x) // 2
        return cls(n, x[:n], x[n:])

    @classmethod
    def random(cls, n, rng: np.random.Generator, scale=0.5):
        return cls(n, rng.uniform(-scale, scale, n), rng.uniform(-scale, scale, n))

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([self.p, self.q])

    @property
    def a(self) -> np.ndarray:
        qq = np.concatenate([[0.0], self.q, [0.0]])
        return np.exp(qq[:-1] - qq[1:])

    @property
    def b(self) -> np.ndarray:
        return np.exp(self.p)


@dataclass(frozen=True)
class TridiagonalMonodromy:
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diag)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def bidiagonal_factor(x, n: int):
    """``X`` from coordinates ``x = (p, q)``; works on duals."""
    p, q = x[:n], x[n:]
    qq = dual.concatenate([np.zeros(1), q, np.zeros(1)])
    a = dual.exp(qq[:-1] - qq[1:])
    b = dual.exp(p)
    return dual.diag(a) + dual.diag(b, 1)


def monodromy_matrix(x, n: int):
    """Dense ``T = X X^T`` from coordinates; works on duals."""
    X = bidiagonal_factor(x, n)
    return X @ X.T


def build_monodromy(chart: TodaChart) -> TridiagonalMonodromy:
    a, b = chart.a, chart.b
    d = np.concatenate([a[:-1] ** 2 + b**2, [a[-1] ** 2]])
    return TridiagonalMonodromy(d, b * a[1:])


def _dense(T):
    if isinstance(T, TridiagonalMonodromy):
        return T.matrix()
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise InputError("expected a square matrix")
    return T


@dataclass(frozen=True)
class SpectralInvariants:
    traces: np.ndarray  # tr T^k, k = 1..size
    eigenvalues: np.ndarray


def spectral_invariants(T) -> SpectralInvariants:
    T = _dense(T)
    if np.abs(T - T.T).max() > 1e-12 * max(1.0, np.abs(T).max()):
        raise InputError("spectral_invariants expects a symmetric matrix")
    try:
        ev = np.linalg.eigvalsh(T)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from None
    traces = np.array([np.trace(np.linalg.matrix_power(T, k)) for k in range(1, len(T) + 1)])
    return SpectralInvariants(traces, np.sort(ev))


def strict_skew(A):
    U = np.triu(A, 1)
    return U - U.T


def lax_generator(T, m: int, kappa: float = KAPPA) -> np.ndarray:
    """``kappa * m * (U - U^T)`` with ``U`` the strict upper part of ``T^m``;
    an element of so(n+1)."""
    if m < 1:
        raise InputError("m must be >= 1")
    return kappa * m * strict_skew(np.linalg.matrix_power(_dense(T), m))


def poisson_structure(n: int) -> PoissonStructure:
    labels = tuple(f"p{k}" for k in range(1, n + 1)) + tuple(f"q{k}" for k in range(1, n + 1))
    P = np.zeros((2 * n, 2 * n))
    P[:n, n:] = np.eye(n)
    P[n:, :n] = -np.eye(n)
    return PoissonStructure(2 * n, labels, lambda s: P, name=f"toda{n}")


def hamiltonian_observable(n: int, m: int) -> Observable:
    """``tr T^m`` as a function of canonical coordinates."""
    if m < 1:
        raise InputError("m must be >= 1")

    def fn(x):
        return dual.trace(dual.matrix_power(monodromy_matrix(x, n), m))

    return Observable(fn, "trT" if m == 1 else f"trT{m}")


def trace_power_gradients_mp(x, n: int, ms, dps: int = 40):
    """Analytic gradients of ``tr T^m`` for each ``m`` in ``ms``, in mpmath
    arithmetic with ``dps`` digits.  Rows are ``mpmath`` vectors over
    ``(p, q)``; used where float64 cancellation would swamp a zero bracket."""
    with mpmath.workdps(dps):
        p = [mpmath.mpf(float(v)) for v in x[:n]]
        q = [mpmath.mpf(0)] + [mpmath.mpf(float(v)) for v in x[n:]] + [mpmath.mpf(0)]
        a = [mpmath.exp(q[k] - q[k + 1]) for k in range(n + 1)]
        b = [mpmath.exp(v) for v in p]
        X = mpmath.zeros(n + 1, n + 1)
        for k in range(n + 1):
            X[k, k] = a[k]
        for k in range(n):
            X[k, k + 1] = b[k]
        T = X * X.T
        dX = []
        for k in range(n):  # d/dp_k
            D = mpmath.zeros(n + 1, n + 1)
            D[k, k + 1] = b[k]
            dX.append(D)
        for k in range(n):  # d/dq_k: a_k = exp(q_{k-1} - q_k) in 1-based labels
            D = mpmath.zeros(n + 1, n + 1)
            D[k, k] = -a[k]
            D[k + 1, k + 1] = a[k + 1]
            dX.append(D)
        dT = [D * X.T + X * D.T for D in dX]
        rows = []
        for m in ms:
            P = T ** (m - 1)
            rows.append([m * sum((P * D)[i, i] for i in range(n + 1)) for D in dT])
        return rows


def canonical_bracket_mp(gF, gG, n: int, dps: int = 40):
    """``{F, G} = sum_k dF/dp_k dG/dq_k - dF/dq_k dG/dp_k`` in mpmath."""
    with mpmath.workdps(dps):
        return mpmath.fsum(gF[k] * gG[n + k] - gF[n + k] * gG[k] for k in range(n))


def reflection_hamiltonian(chart: TodaChart, m: int) -> float:
    return hamiltonian_observable(chart.n, m).value(chart.coords)


def monodromy_velocity(n: int, m: int, x) -> np.ndarray:
    """Chain-rule derivative of ``T`` along the canonical flow of ``tr T^m``."""
    ps = poisson_structure(n)
    v = hamiltonian_vector_field(ps, hamiltonian_observable(n, m), x)
    J = dual.jacobian(lambda y: monodromy_matrix(y, n), x)
    return J @ v


@dataclass(frozen=True)
class KappaFit:
    kappa: float
    residual: float  # max-abs misfit relative to max |dT/dt|
    samples: int


def calibrate_kappa(n: int, samples=None, rng=None, count: int = 10, m: int = 1, max_residual=1e-6) -> KappaFit:
    """Least-squares ``kappa`` in ``dT/dt = [kappa m (U - U^T), T]``.

    ``samples`` are coordinate vectors; otherwise ``count`` random charts are
    drawn from ``rng``.
    """
    if samples is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        samples = [TodaChart.random(n, rng).coords for _ in range(count)]
    samples = [np.asarray(s, dtype=float) for s in samples]
    if len(samples) < 10:
        raise InputError("calibrate_kappa needs at least 10 sample charts")
    num = den = 0.0
    pairs = []
    for x in samples:
        T = monodromy_matrix(x, n)
        A = lax_generator(T, m, 1.0)
        C = A @ T - T @ A
        D = monodromy_velocity(n, m, x)
        num += float(np.sum(C * D))
        den += float(np.sum(C * C))
        pairs.append((C, D))
    if den == 0.0:
        raise ConventionMismatchError("degenerate calibration samples")
    kappa = num / den
    residual = max(
        float(np.abs(kappa * C - D).max() / max(np.abs(D).max(), 1e-300)) for C, D in pairs
    )
    if residual > max_residual:
        raise ConventionMismatchError(
            f"no single kappa reproduces the flow (kappa={kappa:.6g}, residual={residual:.3g})"
        )
    return KappaFit(kappa, residual, len(samples))


def _flip(n):
    return np.eye(n)[::-1]


def iwasawa_factor(M, method: str = "householder"):
    """``M = b @ k`` with ``b`` upper triangular (positive diagonal) and ``k``
    in SO(n).

    ``method="cholesky"`` takes ``b`` from the reverse (UL) Cholesky factor of
    ``M M^T`` and sets ``k = b^{-1} M``.  ``method="householder"`` gets the
    same factors from a QR decomposition of the index-reversed ``M^T``; it
    keeps ``k`` orthogonal to rounding even when ``M`` is badly conditioned.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError("iwasawa_factor expects a square matrix")
    n = len(M)
    det = np.linalg.det(M)
    if not det > 0:
        raise DomainError("Iwasawa factorisation needs det M > 0")
    J = _flip(n)
    if method == "cholesky":
        A = M @ M.T
        try:
            L = np.linalg.cholesky(J @ A @ J)
        except np.linalg.LinAlgError:
            raise ConditioningError("M M^T is numerically singular") from None
        b = J @ L @ J
        if np.linalg.cond(b) > 1e14:
            raise ConditioningError("triangular factor is near singular")
        k = scipy.linalg.solve_triangular(b, M, lower=False)
    elif method == "householder":
        Q, R = np.linalg.qr(J @ M.T @ J)
        s = np.sign(np.diag(R))
        s[s == 0] = 1.0
        R = s[:, None] * R
        Q = Q * s
        b = J @ R.T @ J
        k = J @ Q.T @ J
        if np.abs(np.diag(b)).min() < 1e-300:
            raise ConditioningError("M is numerically singular")
    else:
        raise InputError(f"unknown method {method!r}")
    return b, k


def _traceless(A):
    return A - np.trace(A) / len(A) * np.eye(len(A))


MAX_EXPONENT = 700.0  # exp overflows float64 beyond ~709


def factorization_solve(T0, m: int, t: float, kappa: float = KAPPA, slices: int | None = None,
                        max_slice_norm: float = 1.0) -> np.ndarray:
    """Exact flow of ``tr T^m`` by Iwasawa factorisation.

    Per slice of length ``h``: factor ``exp(-kappa m h pi_0(T^m)) = b k`` and
    conjugate ``T -> k T k^T``.  The sign makes the result agree with
    ``dT/dt = [lax_generator(T, m, kappa), T]``.  The flow is a one-parameter
    group, so slicing changes nothing but conditioning; by default slices are
    chosen so each exponent has spectral norm at most ``max_slice_norm``.
    ``slices=1`` forces a single factorisation and raises :class:`RangeError`
    if the exponential would overflow.
    """
    T = _dense(T0).copy()
    if np.abs(T - T.T).max() > 1e-12 * max(1.0, np.abs(T).max()):
        raise InputError("T0 must be symmetric")
    try:
        np.linalg.cholesky(T)
    except np.linalg.LinAlgError:
        raise DomainError("T0 must be positive definite") from None
    if t == 0:
        return T
    norm = abs(kappa) * m * abs(t) * np.linalg.norm(_traceless(np.linalg.matrix_power(T, m)), 2)
    if slices is None:
        slices = max(1, int(np.ceil(norm / max_slice_norm)))
    elif slices < 1:
        raise InputError("slices must be >= 1")
    if norm / slices > MAX_EXPONENT:
        raise RangeError(
            f"exponent norm {norm / slices:.3g} overflows; use more time slices (slices > {int(norm / MAX_EXPONENT)})"
        )
    h = t / slices
    for _ in range(slices):
        Q = -kappa * m * h * _traceless(np.linalg.matrix_power(T, m))
        M = scipy.linalg.expm(0.5 * (Q + Q.T))
        if not np.all(np.isfinite(M)):
            raise RangeError("matrix exponential overflowed; use more time slices")
        _, k = iwasawa_factor(M)
        T = k @ T @ k.T
        T = 0.5 * (T + T.T)
    return T


def random_chart_samples(n: int, count: int, rng: np.random.Generator, scale=0.5) -> list:
    return [TodaChart.random(n, rng, scale).coords for _ in range(count)]
