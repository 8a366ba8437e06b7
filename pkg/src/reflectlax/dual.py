"""Forward-mode dual numbers carrying a full gradient.

A :class:`Dual` holds a value (scalar or array) and the derivative of that
value with respect to ``nvar`` independent variables, stored in a trailing
axis: ``grad.shape == val.shape + (nvar,)``.  Arithmetic is truncated at
first order, so derivatives are exact up to floating-point rounding.

The module-level functions (:func:`exp`, :func:`log`, :func:`trace`, ...)
accept plain numbers/arrays as well, so an observable written once can be
evaluated cheaply on floats or differentiated on duals.
"""

from __future__ import annotations

import numpy as np

from .errors import EvaluationError, InputError


class Dual:
    __slots__ = ("val", "grad")
    __array_priority__ = 1000  # make ndarray <op> Dual defer to Dual

    def __init__(self, val, grad):
        self.val = np.asarray(val, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        if self.grad.shape[:-1] != self.val.shape:
            raise InputError(
                f"gradient shape {self.grad.shape} does not extend value shape {self.val.shape}"
            )

    @property
    def nvar(self) -> int:
        return self.grad.shape[-1]

    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self):
        return self.val.ndim

    def __len__(self):
        return len(self.val)

    def __repr__(self):
        return f"Dual(val={self.val!r}, nvar={self.nvar})"

    def __float__(self):
        return float(self.val)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.grad + other.grad)
        other = np.asarray(other, dtype=float)
        val = self.val + other
        return Dual(val, np.broadcast_to(self.grad, val.shape + (self.nvar,)))

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.val * other.val,
                self.val[..., None] * other.grad + other.val[..., None] * self.grad,
            )
        other = np.asarray(other, dtype=float)
        return Dual(self.val * other, other[..., None] * self.grad)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return self * other ** -1
        other = np.asarray(other, dtype=float)
        return Dual(self.val / other, self.grad / other[..., None])

    def __rtruediv__(self, other):
        return np.asarray(other, dtype=float) * self ** -1

    def __pow__(self, p):
        if isinstance(p, Dual):
            raise InputError("dual exponents are not supported; use exp(p * log(x))")
        p = float(p)
        if p == 0.0:
            return Dual(np.ones_like(self.val), np.zeros_like(self.grad))
        dval = p * self.val ** (p - 1.0)
        return Dual(self.val**p, dval[..., None] * self.grad)

    def __matmul__(self, other):
        if isinstance(other, Dual):
            _check_2d(self, other)
            val = self.val @ other.val
            grad = np.einsum("ij,jkn->ikn", self.val, other.grad) + np.einsum(
                "ijn,jk->ikn", self.grad, other.val
            )
            return Dual(val, grad)
        other = np.asarray(other, dtype=float)
        _check_2d(self, other)
        return Dual(self.val @ other, np.einsum("ijn,jk->ikn", self.grad, other))

    def __rmatmul__(self, other):
        other = np.asarray(other, dtype=float)
        _check_2d(other, self)
        return Dual(other @ self.val, np.einsum("ij,jkn->ikn", other, self.grad))

    def __getitem__(self, idx):
        return Dual(self.val[idx], self.grad[idx])

    @property
    def T(self):
        if self.ndim != 2:
            raise InputError("transpose is only defined for matrices")
        return Dual(self.val.T, self.grad.transpose(1, 0, 2))


def _check_2d(a, b):
    if np.ndim(a) != 2 or np.ndim(b) != 2:
        raise InputError("dual matmul supports 2-d operands only")


def is_dual(x) -> bool:
    return isinstance(x, Dual)


def value(x):
    """Strip derivative information."""
    return x.val if isinstance(x, Dual) else np.asarray(x, dtype=float)


def variables(x) -> Dual:
    """Seed independent variables: gradient is the identity."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError("variables must be a 1-d coordinate vector")
    return Dual(x.copy(), np.eye(len(x)))


def constant(x, nvar: int) -> Dual:
    x = np.asarray(x, dtype=float)
    return Dual(x, np.zeros(x.shape + (nvar,)))


# elementary functions ------------------------------------------------------


def exp(x):
    if isinstance(x, Dual):
        v = np.exp(x.val)
        return Dual(v, v[..., None] * x.grad)
    return np.exp(x)


def log(x):
    if isinstance(x, Dual):
        return Dual(np.log(x.val), x.grad / x.val[..., None])
    return np.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        v = np.sqrt(x.val)
        return Dual(v, x.grad / (2.0 * v)[..., None])
    return np.sqrt(x)


def trace(a):
    if isinstance(a, Dual):
        return Dual(np.trace(a.val), np.trace(a.grad, axis1=0, axis2=1))
    return np.trace(a)


def total(a):
    """Sum of all entries."""
    if isinstance(a, Dual):
        axes = tuple(range(a.ndim))
        return Dual(a.val.sum(), a.grad.sum(axis=axes))
    return np.sum(a)


def matrix_power(a, m: int):
    if m < 0:
        raise InputError("negative matrix powers are not supported")
    n = a.shape[0]
    out = np.eye(n) if not isinstance(a, Dual) else constant(np.eye(n), a.nvar)
    for _ in range(m):
        out = out @ a
    return out


def diag(v, k: int = 0):
    """Matrix with the vector ``v`` on its ``k``-th diagonal."""
    if isinstance(v, Dual):
        n = len(v) + abs(k)
        val = np.diag(v.val, k)
        grad = np.zeros((n, n, v.nvar))
        idx = np.arange(len(v))
        rows, cols = (idx, idx + k) if k >= 0 else (idx - k, idx)
        grad[rows, cols] = v.grad
        return Dual(val, grad)
    return np.diag(v, k)


def concatenate(parts):
    """Concatenate 1-d pieces, any of which may be dual."""
    nvar = _nvar_of(parts)
    if nvar is None:
        return np.concatenate([np.atleast_1d(np.asarray(p, dtype=float)) for p in parts])
    vals, grads = [], []
    for p in parts:
        p = p if isinstance(p, Dual) else constant(np.atleast_1d(p), nvar)
        if p.ndim == 0:
            p = Dual(p.val[None], p.grad[None])
        vals.append(p.val)
        grads.append(p.grad)
    return Dual(np.concatenate(vals), np.concatenate(grads))


def array(nested):
    """Build an array from a nested list of scalars, any of which may be dual."""
    flat, shape = _flatten(nested)
    nvar = _nvar_of(flat)
    if nvar is None:
        return np.array(flat, dtype=float).reshape(shape)
    val = np.empty(len(flat))
    grad = np.zeros((len(flat), nvar))
    for i, x in enumerate(flat):
        if isinstance(x, Dual):
            val[i] = x.val
            grad[i] = x.grad
        else:
            val[i] = x
    return Dual(val.reshape(shape), grad.reshape(shape + (nvar,)))


def _flatten(nested):
    if isinstance(nested, (list, tuple)):
        if not nested:
            return [], (0,)
        pieces = [_flatten(x) for x in nested]
        inner = pieces[0][1]
        if any(s != inner for _, s in pieces):
            raise InputError("ragged nested list")
        return [x for f, _ in pieces for x in f], (len(nested),) + inner
    return [nested], ()


def _nvar_of(items):
    for x in items:
        if isinstance(x, Dual):
            return x.nvar
    return None


# derivative drivers ----------------------------------------------------------


def gradient(fn, x) -> np.ndarray:
    """Exact gradient of a scalar function at ``x``."""
    out = fn(variables(x))
    if not isinstance(out, Dual):
        return np.zeros(len(np.atleast_1d(x)))
    if out.ndim != 0:
        raise InputError("gradient() needs a scalar-valued function")
    if not (np.isfinite(out.val) and np.all(np.isfinite(out.grad))):
        raise EvaluationError("non-finite value or derivative")
    return out.grad.copy()


def jacobian(fn, x) -> np.ndarray:
    """Derivative array of shape ``out.shape + (len(x),)``."""
    x = np.asarray(x, dtype=float)
    out = fn(variables(x))
    if not isinstance(out, Dual):
        return np.zeros(np.shape(out) + (len(x),))
    if not np.all(np.isfinite(out.grad)):
        raise EvaluationError("non-finite derivative")
    return out.grad.copy()
