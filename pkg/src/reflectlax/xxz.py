"""Classical XXZ chain with diagonal reflecting boundaries.

Each site carries coordinates ``(k, e, f)`` with

    {k, e} = k e,   {k, f} = -k f,   {e, f} = 2 (k^2 - k^-2)

and Casimir ``omega = k^2 + k^-2 + e f``.  Chain coordinates are ordered
``(k_1, e_1, f_1, ..., k_N, e_N, f_N)``.

K-matrices are used in the denominator-free ("cleared") normalisation

    K(z; xi) = diag(xi z - xi^-1 z^-1, xi z^-1 - xi^-1 z)

which is ``(xi z - xi^-1 z^-1)`` times Sklyanin's ``diag(1, ...)``.  The
regularised monodromy ``S(z) = L_1..L_N K_-(z) L_N..L_1`` is the primitive
object; the transfer function is ``tau(z) = tr(S(z) K_+(z))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dual
from .errors import (
    DegenerateParameterizationError,
    DomainError,
    InputError,
    LeafMismatchError,
    PoleError,
)
from .laurent import Z, ZINV, LaurentMatrix, LaurentPoly, RationalMatrix
from .poisson import Observable, PoissonStructure, Trajectory, integrate_flow

LEAF_TOL = 1e-10


@dataclass(frozen=True)
class SiteState:
    k: float
    e: float
    f: float

    def __post_init__(self):
        if self.k == 0:
            raise DomainError("site coordinate k must be nonzero")
        if not np.all(np.isfinite([self.k, self.e, self.f])):
            raise InputError("non-finite site coordinates")

    @property
    def omega(self) -> float:
        return casimir(self.k, self.e, self.f)


def casimir(k, e, f):
    return k * k + k**-2 + e * f


def leaf_value(t):
    return t * t + t**-2


@dataclass(frozen=True)
class ChainState:
    sites: tuple
    xi_plus: float = 2.0
    xi_minus: float = 2.0
    leaf_params: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        if self.xi_plus == 0 or self.xi_minus == 0:
            raise DomainError("boundary parameters must be nonzero")
        if self.leaf_params is not None:
            lp = tuple(float(t) for t in self.leaf_params)
            if len(lp) != len(self.sites):
                raise InputError("one leaf parameter per site")
            for n, (s, t) in enumerate(zip(self.sites, lp)):
                if abs(s.omega - leaf_value(t)) > LEAF_TOL * max(1.0, leaf_value(t)):
                    raise LeafMismatchError(
                        f"site {n + 1}: omega={s.omega:.12g} but t={t} needs {leaf_value(t):.12g}"
                    )
            object.__setattr__(self, "leaf_params", lp)

    @property
    def N(self) -> int:
        return len(self.sites)

    @property
    def coords(self) -> np.ndarray:
        return np.array([c for s in self.sites for c in (s.k, s.e, s.f)], dtype=float)

    def with_coords(self, x) -> "ChainState":
        x = np.asarray(x, dtype=float)
        sites = tuple(SiteState(*x[3 * n: 3 * n + 3]) for n in range(self.N))
        return ChainState(sites, self.xi_plus, self.xi_minus, None)

    @property
    def homogeneous_t(self) -> float:
        if not self.leaf_params or len(set(self.leaf_params)) != 1:
            raise InputError("a homogeneous leaf (all t_n equal) is required")
        return self.leaf_params[0]

    @classmethod
    def random(cls, N, t, rng: np.random.Generator, xi_plus=2.0, xi_minus=2.0,
               k_range=(0.8, 1.25), e_range=(0.3, 0.8)):
        """On-leaf random chain: draw ``k, e`` and solve the Casimir for ``f``.

        ``t`` may be a scalar (homogeneous) or one value per site.
        """
        ts = np.broadcast_to(np.asarray(t, dtype=float), (N,))
        sites = []
        for tn in ts:
            k = rng.uniform(*k_range)
            e = rng.uniform(*e_range)
            f = (leaf_value(tn) - k * k - k**-2) / e
            sites.append(SiteState(k, e, f))
        return cls(tuple(sites), xi_plus, xi_minus, tuple(float(x) for x in ts))


# Poisson structure ---------------------------------------------------------------


def poisson_structure(N: int) -> PoissonStructure:
    labels = tuple(f"{c}_{n}" for n in range(1, N + 1) for c in "kef")

    def tensor(x):
        rows = [[0.0] * (3 * N) for _ in range(3 * N)]
        for n in range(N):
            k, e, f = x[3 * n], x[3 * n + 1], x[3 * n + 2]
            i = 3 * n
            ke, kf, ef = k * e, -(k * f), 2.0 * (k * k - k**-2)
            rows[i][i + 1], rows[i + 1][i] = ke, -ke
            rows[i][i + 2], rows[i + 2][i] = kf, -kf
            rows[i + 1][i + 2], rows[i + 2][i + 1] = ef, -ef
        return dual.array(rows)

    return PoissonStructure(3 * N, labels, tensor, name=f"xxz{N}")


def omega_observable(n: int) -> Observable:
    """Casimir of site ``n`` (1-based)."""
    i = 3 * (n - 1)
    return Observable(lambda x: casimir(x[i], x[i + 1], x[i + 2]), f"omega_{n}")


# Lax and K matrices ----------------------------------------------------------------


def lax_eval(k, e, f, z):
    return dual.array([[z * k - 1.0 / (z * k), e], [f, z / k - k / z]])


def lax_matrix(s: SiteState) -> LaurentMatrix:
    if s.k == 0:
        raise DomainError("k = 0")
    return LaurentMatrix([
        [Z * s.k - ZINV * (1.0 / s.k), LaurentPoly.constant(s.e)],
        [LaurentPoly.constant(s.f), Z * (1.0 / s.k) - ZINV * s.k],
    ])


def k_eval(xi, z) -> np.ndarray:
    """Cleared K-matrix at a numeric ``z``."""
    return np.diag([xi * z - 1.0 / (xi * z), xi / z - z / xi])


def k_matrix(xi: float, normalization: str = "cleared"):
    """Diagonal boundary matrix.

    ``cleared`` returns a :class:`LaurentMatrix`; ``sklyanin`` returns a
    :class:`RationalMatrix` equal to ``diag(1, (xi/z - z/xi)/(xi z - 1/(xi z)))``.
    """
    if xi == 0:
        raise DomainError("xi must be nonzero")
    cleared = LaurentMatrix([
        [Z * xi - ZINV * (1.0 / xi), LaurentPoly()],
        [LaurentPoly(), ZINV * xi - Z * (1.0 / xi)],
    ])
    if normalization == "cleared":
        return cleared
    if normalization == "sklyanin":
        return RationalMatrix(cleared, Z * xi - ZINV * (1.0 / xi))
    raise InputError(f"unknown normalization {normalization!r}")


def trig_r_matrix(z, w) -> np.ndarray:
    """Trigonometric r-matrix in the 2 (x) 2 evaluation representation."""
    if abs(z * z - w * w) < 1e-14 * max(1.0, z * z):
        raise PoleError(f"r(z, w) has a pole at z^2 = w^2 (z={z}, w={w})")
    a = z * z + w * w
    b = 4.0 * z * w
    return np.array(
        [[a, 0, 0, 0], [0, -a, b, 0], [0, b, -a, 0], [0, 0, 0, a]], dtype=float
    ) / (2.0 * (z * z - w * w))


def r12(u) -> np.ndarray:
    """One-variable form ``r_12(z/w) = r(z, w)``."""
    return trig_r_matrix(u, 1.0)


def _embed(r4, legs):
    """Place a 2 (x) 2 operator on tensor legs ``legs`` of (C^2)^(x)3."""
    r = r4.reshape(2, 2, 2, 2)
    out = np.zeros((2,) * 6)
    i, j = legs
    k = 3 - i - j
    for a, b, c, d in np.ndindex(2, 2, 2, 2):
        for e in range(2):
            row = [0, 0, 0]
            col = [0, 0, 0]
            row[i], row[j], row[k] = a, b, e
            col[i], col[j], col[k] = c, d, e
            out[tuple(row) + tuple(col)] += r[a, b, c, d]
    return out.reshape(8, 8)


def spectral_cybe_defect(z, w) -> float:
    """``[r12(z), r13(zw)] + [r12(z), r23(w)] + [r13(zw), r23(w)]``, max-abs."""
    a = _embed(r12(z), (0, 1))
    b = _embed(r12(z * w), (0, 2))
    c = _embed(r12(w), (1, 2))
    comm = lambda x, y: x @ y - y @ x
    return float(np.abs(comm(a, b) + comm(a, c) + comm(b, c)).max())


# monodromy and transfer -----------------------------------------------------------


def monodromy_eval(x, z, xi_minus):
    """``S(z)`` from chain coordinates at numeric ``z``; works on duals."""
    N = len(x) // 3
    Ls = [lax_eval(x[3 * n], x[3 * n + 1], x[3 * n + 2], z) for n in range(N)]
    S = k_eval(xi_minus, z)
    for L in reversed(Ls):
        S = L @ S @ L
    return S


def reflection_monodromy(c: ChainState) -> LaurentMatrix:
    S = k_matrix(c.xi_minus)
    for s in reversed(c.sites):
        L = lax_matrix(s)
        S = L @ S @ L
    return S


def unregularized_monodromy(c: ChainState, z, normalization: str = "sklyanin") -> np.ndarray:
    """``T(z) K_-(z) T^{-1}(1/z)`` with explicit inverses; for cross-checks only."""
    T = np.eye(2)
    for s in c.sites:
        T = T @ lax_eval(s.k, s.e, s.f, z)
    Tinv = np.eye(2)
    for s in c.sites:
        Tinv = Tinv @ lax_eval(s.k, s.e, s.f, 1.0 / z)
    K = k_matrix(c.xi_minus, normalization)(z)
    return T @ K @ np.linalg.inv(Tinv)


def transfer_eval(x, z, xi_plus, xi_minus):
    return dual.trace(monodromy_eval(x, z, xi_minus) @ k_eval(xi_plus, z))


def transfer_value(c: ChainState, z) -> float:
    if z == 0:
        raise DomainError("z must be nonzero")
    return float(transfer_eval(c.coords, z, c.xi_plus, c.xi_minus))


def transfer_observable(z, xi_plus, xi_minus) -> Observable:
    if z == 0:
        raise DomainError("z must be nonzero")
    return Observable(lambda x: transfer_eval(x, z, xi_plus, xi_minus), f"tau_{z:g}")


# degeneration and local Hamiltonian -------------------------------------------------


def projector_degeneration(s: SiteState, t: float):
    """``(alpha, beta)`` with ``L(t) = alpha beta^T`` on the leaf ``omega = t^2 + t^-2``."""
    if s.e == 0:
        raise DegenerateParameterizationError("e = 0: alpha is undefined")
    if abs(s.omega - leaf_value(t)) > LEAF_TOL * max(1.0, leaf_value(t)):
        raise LeafMismatchError(f"omega={s.omega:.12g} is not on the leaf t={t}")
    alpha = np.array([1.0, (t / s.k - s.k / t) / s.e])
    beta = np.array([t * s.k - 1.0 / (t * s.k), s.e])
    return alpha, beta


def local_terms(x, t, xi_plus, xi_minus):
    """Named log-arguments of the local Hamiltonian; works on duals."""
    N = len(x) // 3
    om = leaf_value(t)
    k = [x[3 * n] for n in range(N)]
    e = [x[3 * n + 1] for n in range(N)]
    f = [x[3 * n + 2] for n in range(N)]
    terms = [("H_0", xi_plus * k[0] - 1.0 / (xi_plus * k[0]))]
    for n in range(N - 1):
        arg = (
            e[n] * f[n + 1] + e[n + 1] * f[n]
            + om * (k[n] * k[n + 1] + 1.0 / (k[n] * k[n + 1]))
            - 2.0 * (k[n] / k[n + 1] + k[n + 1] / k[n])
        )
        terms.append((f"H_{n + 1},{n + 2}", arg))
    terms.append((f"H_{N}", xi_minus * k[-1] - 1.0 / (xi_minus * k[-1])))
    return terms


def _local_sum(x, t, xi_plus, xi_minus):
    total = 0.0
    for name, arg in local_terms(x, t, xi_plus, xi_minus):
        if not float(dual.value(arg)) > 0:
            raise DomainError(f"{name}: log argument {float(dual.value(arg)):.6g} is not positive")
        total = total + dual.log(arg)
    return total


def local_hamiltonian(c: ChainState) -> float:
    if c.N == 0:
        raise InputError("local Hamiltonian needs at least one site")
    return float(_local_sum(c.coords, c.homogeneous_t, c.xi_plus, c.xi_minus))


def local_hamiltonian_observable(t, xi_plus, xi_minus) -> Observable:
    return Observable(lambda x: _local_sum(x, t, xi_plus, xi_minus), "H_local")


def product_formula_constant(t) -> float:
    """``exp(H_local) = C tr(S(t) K_+(t))`` in cleared normalisation."""
    return (t * t - t**-2) ** -2


# bracket checks ------------------------------------------------------------------


def bracket_tensor(ps: PoissonStructure, Mz, Mw, x) -> np.ndarray:
    """4x4 array of ``{M_ij(z), M_kl(w)}`` at row ``(i,k)``, column ``(j,l)``."""
    Jz = dual.jacobian(Mz, x)
    Jw = dual.jacobian(Mw, x)
    B = np.einsum("ija,ab,klb->ikjl", Jz, ps.tensor(x), Jw)
    return B.reshape(4, 4)


def _check_generic(z, w):
    if z == 0 or w == 0:
        raise PoleError("spectral parameters must be nonzero")
    if abs(z * z - w * w) < 1e-12:
        raise PoleError("z = +-w is a pole of r(z/w)")
    if abs((z * w) ** 2 - 1.0) < 1e-12:
        raise PoleError("zw = +-1 is a pole of r(zw)")


def reflection_algebra_check(c: ChainState, z, w) -> dict:
    """Max-abs defects of the Sklyanin bracket (site 1) and of the reflection
    algebra for ``S``."""
    _check_generic(z, w)
    x = c.coords
    I2 = np.eye(2)

    site = x[:3]
    ps1 = poisson_structure(1)
    Lz = lambda y: lax_eval(y[0], y[1], y[2], z)
    Lw = lambda y: lax_eval(y[0], y[1], y[2], w)
    B = bracket_tensor(ps1, Lz, Lw, site)
    L1 = np.kron(Lz(site), I2)
    L2 = np.kron(I2, Lw(site))
    r = trig_r_matrix(z, w)
    sk = np.abs(B - (r @ L1 @ L2 - L1 @ L2 @ r)).max()

    ps = poisson_structure(c.N)
    Sz = lambda y: monodromy_eval(y, z, c.xi_minus)
    Sw = lambda y: monodromy_eval(y, w, c.xi_minus)
    B = bracket_tensor(ps, Sz, Sw, x)
    S1 = np.kron(Sz(x), I2)
    S2 = np.kron(I2, Sw(x))
    rzw = r12(z * w)
    rhs = r @ S1 @ S2 - S1 @ S2 @ r + S1 @ rzw @ S2 - S2 @ rzw @ S1
    refl = np.abs(B - rhs).max()
    return {"sklyanin": float(sk), "reflection": float(refl)}


def k_reflection_defect(xi, z, w) -> float:
    """Classical reflection equation for the boundary matrix itself."""
    _check_generic(z, w)
    I2 = np.eye(2)
    K1 = np.kron(k_eval(xi, z), I2)
    K2 = np.kron(I2, k_eval(xi, w))
    a, b = r12(z / w), r12(z * w)
    return float(np.abs(a @ K1 @ K2 + K1 @ b @ K2 - K2 @ b @ K1 - K2 @ K1 @ a).max())


# semiclassical limit ---------------------------------------------------------------


def quantum_r_matrix(z, q) -> np.ndarray:
    den = q * z - 1.0 / (q * z)
    if abs(den) < 1e-14 or abs(z - 1.0 / z) < 1e-14:
        raise PoleError(f"R(z) is singular at z={z}")
    b = (z - 1.0 / z) / den
    c = (q - 1.0 / q) / den
    return np.array([[1, 0, 0, 0], [0, b, c, 0], [0, c, b, 0], [0, 0, 0, 1]], dtype=float)


def quantum_prefactor(z, q) -> float:
    return (np.sqrt(q) * z - 1.0 / (np.sqrt(q) * z)) / (z - 1.0 / z)


@dataclass(frozen=True)
class SemiclassicalFit:
    slope: float
    h: np.ndarray
    defects: np.ndarray


def semiclassical_check(z, h_values) -> SemiclassicalFit:
    """Log-log slope of ``|f(z) R(z) - 1 - h r(z)|`` against ``h``."""
    h = np.asarray(h_values, dtype=float)
    if len(h) < 3 or np.any(h <= 0) or np.any(h > 0.1):
        raise InputError("need at least 3 values of h in (0, 0.1]")
    if abs(z * z - 1.0) < 1e-12:
        raise PoleError("z = +-1 is a pole")
    r = r12(z)
    d = []
    for hv in h:
        q = np.exp(hv)
        d.append(np.abs(quantum_prefactor(z, q) * quantum_r_matrix(z, q) - np.eye(4) - hv * r).max())
    d = np.array(d)
    slope = np.polyfit(np.log(h), np.log(d), 1)[0]
    return SemiclassicalFit(float(slope), h, d)


# dynamics -------------------------------------------------------------------------


def evolve_chain(c: ChainState, H: Observable, t_final, dt, sample_z=(1.3, 1.7), tol=None,
                 output_times=None) -> Trajectory:
    """Flow of ``H`` on the chain; records every ``omega_n`` and ``tau(z)``.

    A log-domain exit of the local Hamiltonian ends the run instead of
    raising: the partial trajectory comes back with
    ``flags["log_domain_exit"] = True`` and the exit time in
    ``flags["stopped_at"]``.  On a homogeneous leaf the smallest log argument
    met along the way is recorded as ``flags["min_log_argument"]``.
    """
    ps = poisson_structure(c.N)
    invs = [omega_observable(n) for n in range(1, c.N + 1)]
    invs += [
        Observable(lambda x, z=z: transfer_eval(x, z, c.xi_plus, c.xi_minus), f"tau_{z:g}")
        for z in sample_z
    ]
    traj = integrate_flow(ps, H, c.coords, t_final, dt, tol=tol, invariants=invs,
                          output_times=output_times, stop_on=(DomainError,))
    traj.flags["log_domain_exit"] = "stopped_at" in traj.flags
    if c.leaf_params and len(set(c.leaf_params)) == 1:
        t = c.leaf_params[0]
        worst = min(
            min(float(a) for _, a in local_terms(x, t, c.xi_plus, c.xi_minus)) for x in traj.states
        )
        traj.flags["min_log_argument"] = worst
    return traj
