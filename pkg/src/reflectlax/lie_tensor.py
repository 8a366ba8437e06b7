"""Tensor algebra over explicit finite-dimensional Lie algebras.

Conventions used throughout:

* vectors are coordinate arrays in the algebra's basis;
* an order-2 tensor ``t`` stands for ``sum_ab t[a, b] x_a (x) x_b`` and is a
  ``(dim, dim)`` array (order 3 likewise ``(dim, dim, dim)``);
* a linear map (automorphism, ``ad_x``) is a matrix whose columns are the
  images of basis vectors, so ``(A (x) B) t == A @ t @ B.T``;
* wedge: ``a ^ b = a (x) b - b (x) a`` (no factor 1/2).

Every defect function works in float64.  :func:`cre_defect` and
:func:`cybe_defect` also run in exact rational arithmetic when passed
``exact=True`` (inputs are converted with :func:`to_exact`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import InputError, NondegeneracyError, UnsupportedError

DEFECT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LieAlgebraData:
    """Basis, structure constants and invariant form of a Lie algebra.

    ``structure_constants[i, j, k]`` is the coefficient of ``x_k`` in
    ``[x_i, x_j]``.  ``positive_roots`` lists ``(E_alpha, F_alpha)`` index
    pairs and ``cartan`` the Cartan indices; both are only needed to build
    the standard r-matrices.
    """

    name: str
    basis_labels: tuple
    structure_constants: np.ndarray
    trace_form: np.ndarray
    matrix_rep: np.ndarray | None = None
    positive_roots: tuple = ()
    cartan: tuple = ()

    def __post_init__(self):
        d = len(self.basis_labels)
        if d == 0:
            raise InputError("algebra must have positive dimension")
        if self.structure_constants.shape != (d, d, d):
            raise InputError(
                f"structure constants have shape {self.structure_constants.shape}, expected {(d, d, d)}"
            )
        if self.trace_form.shape != (d, d):
            raise InputError("trace form must be dim x dim")
        if self.matrix_rep is not None and (
            self.matrix_rep.ndim != 3 or self.matrix_rep.shape[0] != d
        ):
            raise InputError("matrix_rep must be a stack of dim square matrices")

    @property
    def dim(self) -> int:
        return len(self.basis_labels)

    def index(self, label: str) -> int:
        return self.basis_labels.index(label)

    def basis_vector(self, label: str) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.index(label)] = 1.0
        return v

    def to_matrix(self, x) -> np.ndarray:
        if self.matrix_rep is None:
            raise UnsupportedError(f"{self.name} has no matrix representation")
        return np.tensordot(_vector(self, x), self.matrix_rep, axes=1)

    def coordinates(self, m) -> np.ndarray:
        """Basis coordinates of a matrix in the span of ``matrix_rep``."""
        if self.matrix_rep is None:
            raise UnsupportedError(f"{self.name} has no matrix representation")
        flat = self.matrix_rep.reshape(self.dim, -1).T
        target = np.asarray(m, dtype=float).ravel()
        coeffs, *_ = np.linalg.lstsq(flat, target, rcond=None)
        if np.abs(flat @ coeffs - target).max(initial=0.0) > 1e-9 * max(1.0, np.abs(target).max()):
            raise InputError("matrix is not in the span of the representation")
        return coeffs

    def structure_defects(self) -> dict:
        """Max-abs violations of antisymmetry, Jacobi, form symmetry/invariance."""
        c = self.structure_constants
        B = self.trace_form
        out = {
            "antisymmetry": float(np.abs(c + c.transpose(1, 0, 2)).max()),
            "jacobi": float(np.abs(jacobi_tensor(c)).max()),
            "form_symmetry": float(np.abs(B - B.T).max()),
            # B([x_i, x_j], x_k) + B(x_j, [x_i, x_k])
            "form_invariance": float(
                np.abs(np.einsum("ijm,mk->ijk", c, B) + np.einsum("ikm,jm->ijk", c, B)).max()
            ),
        }
        if self.matrix_rep is not None:
            rho = self.matrix_rep
            comm = np.einsum("iab,jbc->ijac", rho, rho) - np.einsum("jab,ibc->ijac", rho, rho)
            recon = np.einsum("ijk,kac->ijac", c, rho)
            out["representation"] = float(np.abs(comm - recon).max())
        return out

    def validate(self, tol: float = 1e-12) -> None:
        bad = {k: v for k, v in self.structure_defects().items() if v > tol}
        if bad:
            raise InputError(f"{self.name}: structure checks failed {bad}")


def jacobi_tensor(c: np.ndarray) -> np.ndarray:
    return (
        np.einsum("ijm,mkl->ijkl", c, c)
        + np.einsum("jkm,mil->ijkl", c, c)
        + np.einsum("kim,mjl->ijkl", c, c)
    )


@dataclass(frozen=True, eq=False)
class Automorphism:
    matrix: np.ndarray
    order_hint: int | None = None
    label: str = "sigma"

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError("automorphism matrix must be square")
        if self.order_hint is not None and self.order_hint < 1:
            raise InputError("order_hint must be a positive integer")

    def __call__(self, x):
        return self.matrix @ x

    def defects(self, alg: LieAlgebraData) -> dict:
        s = self.matrix
        if s.shape != (alg.dim, alg.dim):
            raise InputError("automorphism does not match algebra dimension")
        c = alg.structure_constants
        # sigma[x_i, x_j] versus [sigma x_i, sigma x_j]
        lhs = np.einsum("ijk,lk->ijl", c, s)
        rhs = np.einsum("ai,bj,abl->ijl", s, s, c)
        out = {
            "homomorphism": float(np.abs(lhs - rhs).max()),
            "invertibility": float(1.0 / max(np.linalg.svd(s, compute_uv=False).min(), 1e-300)),
        }
        if self.order_hint is not None:
            p = np.linalg.matrix_power(s, self.order_hint)
            out["order"] = float(np.abs(p - np.eye(len(s))).max())
        return out

    def validate(self, alg: LieAlgebraData, tol: float = 1e-10) -> None:
        d = self.defects(alg)
        if d["invertibility"] > 1e12:
            raise InputError(f"{self.label} is not invertible")
        if d["homomorphism"] > tol or d.get("order", 0.0) > tol:
            raise InputError(f"{self.label} is not an automorphism of the stated order: {d}")


@dataclass(frozen=True, eq=False)
class SubalgebraBasis:
    """Rows of ``vectors`` span a subspace (possibly complex, for eigenspaces)."""

    vectors: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = self.vectors
        if v.ndim != 2:
            raise InputError("vectors must be a 2-d array of row vectors")
        if len(v) and np.linalg.matrix_rank(v, tol=1e-9) != len(v):
            raise InputError(f"{self.label}: spanning vectors are linearly dependent")

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def closure_defect(self, alg: LieAlgebraData) -> float:
        """Max distance of a pairwise bracket from the span."""
        if self.dim == 0:
            return 0.0
        q, _ = np.linalg.qr(self.vectors.T)
        worst = 0.0
        for x in self.vectors:
            for y in self.vectors:
                b = bracket(alg, x, y)
                worst = max(worst, float(np.abs(b - q @ (q.conj().T @ b)).max()))
        return worst


# basic operations ----------------------------------------------------------------


def _vector(alg, x):
    x = np.asarray(x)
    if x.shape != (alg.dim,):
        raise InputError(f"expected a vector of length {alg.dim}, got shape {x.shape}")
    return x


def _tensor(alg, t, order):
    t = np.asarray(t)
    if t.ndim != order:
        raise InputError(f"expected an order-{order} tensor, got order {t.ndim}")
    if t.shape != (alg.dim,) * order:
        raise InputError(f"tensor shape {t.shape} does not match algebra dimension {alg.dim}")
    if t.dtype != object and not np.all(np.isfinite(t)):
        raise InputError("tensor has non-finite coefficients")
    return t


def bracket(alg: LieAlgebraData, x, y) -> np.ndarray:
    x, y = _vector(alg, x), _vector(alg, y)
    return np.einsum("i,j,ijk->k", x, y, alg.structure_constants)


def ad(alg: LieAlgebraData, x) -> np.ndarray:
    """Matrix of ``ad_x`` (columns are ``[x, x_i]``)."""
    return np.einsum("j,jik->ki", _vector(alg, x), alg.structure_constants)


def wedge(a, b) -> np.ndarray:
    return np.outer(a, b) - np.outer(b, a)


def flip(t: np.ndarray) -> np.ndarray:
    """``t_21``: swap tensor legs."""
    return np.asarray(t).T


def cobracket(alg: LieAlgebraData, r, x) -> np.ndarray:
    """``delta(x) = (ad_x (x) 1 + 1 (x) ad_x) r``."""
    r = _tensor(alg, r, 2)
    a = ad(alg, x)
    return a @ r + r @ a.T


def cre_defect(alg: LieAlgebraData, r, sigma: Automorphism, exact: bool = False) -> np.ndarray:
    """``C_sigma(r) = (s(x)s) r + r - (s(x)1) r - (1(x)s) r``."""
    r = _tensor(alg, r, 2)
    s = sigma.matrix
    if s.shape != (alg.dim, alg.dim):
        raise InputError("automorphism does not match algebra dimension")
    if exact:
        r, s = to_exact(r), to_exact(s)
    return s @ r @ s.T + r - s @ r - r @ s.T


def cybe_defect(alg: LieAlgebraData, r, exact: bool = False) -> np.ndarray:
    """``[[r, r]] = [r12, r13] + [r13, r23] + [r12, r23]`` as an order-3 tensor."""
    r = _tensor(alg, r, 2)
    c = alg.structure_constants
    if exact:
        r, c = to_exact(r), to_exact(c)
    t12_13 = np.einsum("ab,cd,acm->mbd", r, r, c)
    t13_23 = np.einsum("ab,cd,bdm->acm", r, r, c)
    t12_23 = np.einsum("ab,cd,bcm->amd", r, r, c)
    return t12_13 + t13_23 + t12_23


def _check_nondegenerate(alg):
    B = alg.trace_form
    sv = np.linalg.svd(B, compute_uv=False)
    if sv.min() <= 1e-12 * max(sv.max(), 1.0):
        raise NondegeneracyError(f"{alg.name}: trace form is degenerate")


def operator_form(alg: LieAlgebraData, t) -> np.ndarray:
    """Matrix of ``y -> <B(y, .) (x) 1, t>``, the operator attached to ``t``."""
    t = _tensor(alg, t, 2)
    _check_nondegenerate(alg)
    return t.T @ alg.trace_form


def casimir(alg: LieAlgebraData) -> np.ndarray:
    """Dual-basis Casimir tensor of the trace form."""
    _check_nondegenerate(alg)
    return np.linalg.inv(alg.trace_form)


def mcybe_defect(alg: LieAlgebraData, r, x, y) -> np.ndarray:
    """``[Rx, Ry] - R([Rx, y] + [x, Ry]) + [Jx, Jy]`` with R, J the skew and
    symmetric parts of ``r`` turned into operators."""
    r = _tensor(alg, r, 2)
    R = operator_form(alg, 0.5 * (r - r.T))
    J = operator_form(alg, 0.5 * (r + r.T))
    x, y = _vector(alg, x), _vector(alg, y)
    Rx, Ry = R @ x, R @ y
    return (
        bracket(alg, Rx, Ry)
        - R @ (bracket(alg, Rx, y) + bracket(alg, x, Ry))
        + bracket(alg, J @ x, J @ y)
    )


def invariance_defect(alg: LieAlgebraData, C, sub: SubalgebraBasis) -> float:
    """Max over spanning vectors ``x`` of ``|(ad_x (x) 1 + 1 (x) ad_x) C|``."""
    C = _tensor(alg, C, 2)
    worst = 0.0
    for x in sub.vectors:
        a = ad(alg, x)
        worst = max(worst, float(np.abs(a @ C + C @ a.T).max(initial=0.0)))
    return worst


# fixed points and block decomposition -------------------------------------------


@dataclass(frozen=True, eq=False)
class Eigenspace:
    eigenvalue: complex
    basis: SubalgebraBasis
    projector: np.ndarray


@dataclass(frozen=True, eq=False)
class FixedPointDecomposition:
    fixed: SubalgebraBasis
    eigenspaces: list = field(default_factory=list)  # eigenvalue != 1 only

    @property
    def complement_dim(self) -> int:
        return sum(e.basis.dim for e in self.eigenspaces)


def _span(proj: np.ndarray, tol=1e-9) -> np.ndarray:
    u, s, _ = np.linalg.svd(proj)
    rank = int(np.sum(s > tol * max(s.max(initial=0.0), 1.0)))
    basis = u[:, :rank].T.copy()
    basis[np.abs(basis) < 1e-13] = 0.0
    return basis


def _real_if_close(a):
    a = np.asarray(a)
    if np.iscomplexobj(a) and np.abs(a.imag).max(initial=0.0) < 1e-13:
        return a.real.copy()
    return a


def eigen_projectors(sigma: Automorphism) -> list:
    """``[(lambda, P_lambda)]`` for the nonzero spectral projectors of a
    finite-order automorphism (averaging over the cyclic group)."""
    m = sigma.order_hint
    if m is None:
        raise UnsupportedError("eigenspace decomposition needs a finite order (order_hint)")
    s = sigma.matrix
    powers = [np.linalg.matrix_power(s, k) for k in range(m)]
    out = []
    for j in range(m):
        lam = np.exp(2j * np.pi * j / m)
        if j == 0:
            lam = 1.0
        elif 2 * j == m:
            lam = -1.0
        P = sum(np.conj(lam) ** k * powers[k] for k in range(m)) / m
        P = _real_if_close(P)
        if np.abs(P).max() > 1e-12:
            out.append((lam, P))
    return out


def fixed_subalgebra(alg: LieAlgebraData, sigma: Automorphism, decompose: bool = True):
    """Fixed-point subalgebra ``k = ker(sigma - 1)``; with ``decompose`` also
    every other eigenspace of a finite-order ``sigma``."""
    s = sigma.matrix
    if s.shape != (alg.dim, alg.dim):
        raise InputError("automorphism does not match algebra dimension")
    if not decompose:
        k = scipy.linalg.null_space(s - np.eye(alg.dim), rcond=1e-10).T
        return FixedPointDecomposition(SubalgebraBasis(k, "k"))
    fixed = SubalgebraBasis(np.zeros((0, alg.dim)), "k")
    spaces = []
    for i, (lam, P) in enumerate(eigen_projectors(sigma)):
        basis = _real_if_close(_span(P))
        if lam == 1.0:
            fixed = SubalgebraBasis(basis, "k")
        else:
            spaces.append(Eigenspace(lam, SubalgebraBasis(basis, f"p[{lam:.6g}]"), P))
    return FixedPointDecomposition(fixed, spaces)


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    kk: np.ndarray
    kp: np.ndarray
    pk: np.ndarray
    pp: np.ndarray
    blocks: dict  # (lambda_i, lambda_j) -> r_{p_i p_j} (lambda = 1 is k)

    @property
    def pp_norm(self) -> float:
        return float(np.abs(self.pp).max(initial=0.0))

    def total(self) -> np.ndarray:
        return self.kk + self.kp + self.pk + self.pp


def r_block_decomposition(alg: LieAlgebraData, r, sigma: Automorphism) -> BlockDecomposition:
    """Split ``r`` into ``r_kk + r_kp + r_pk + r_pp`` by spectral projectors."""
    r = _tensor(alg, r, 2).astype(float)
    projs = eigen_projectors(sigma)
    blocks = {}
    kk = np.zeros_like(r)
    kp = np.zeros_like(r)
    pk = np.zeros_like(r)
    pp = np.zeros_like(r, dtype=complex)
    for li, Pi in projs:
        for lj, Pj in projs:
            b = Pi @ r @ Pj.T
            blocks[(li, lj)] = _real_if_close(b)
            if li == 1.0 and lj == 1.0:
                kk = kk + _real_if_close(b)
            elif li == 1.0:
                kp = kp + _real_if_close(b)
            elif lj == 1.0:
                pk = pk + _real_if_close(b)
            else:
                pp = pp + b
    return BlockDecomposition(
        _real_if_close(kk), _real_if_close(kp), _real_if_close(pk), _real_if_close(pp), blocks
    )


# exact arithmetic ----------------------------------------------------------------


def to_exact(a, max_denominator: int = 10**6) -> np.ndarray:
    """Object array of Fractions; floats are snapped to the nearest rational."""
    a = np.asarray(a)
    if a.dtype == object:
        return np.vectorize(_frac, otypes=[object])(a, max_denominator)
    if a.size == 0:
        return a.astype(object)
    return np.vectorize(_frac, otypes=[object])(a, max_denominator)


def _frac(x, max_denominator):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    f = Fraction(float(x)).limit_denominator(max_denominator)
    if abs(float(f) - float(x)) > 1e-12 * max(1.0, abs(float(x))):
        raise InputError(f"{x!r} is not close to a rational with denominator <= {max_denominator}")
    return f


def max_abs(t) -> float | Fraction:
    """Max-abs norm; exact for object arrays of Fractions."""
    t = np.asarray(t)
    if t.size == 0:
        return 0.0
    if t.dtype == object:
        return max(abs(x) for x in t.ravel())
    return float(np.abs(t).max())
