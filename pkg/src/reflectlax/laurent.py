"""Laurent polynomials in one spectral parameter and small matrices of them."""

from __future__ import annotations

import numpy as np

from .errors import InputError

PRUNE_TOL = 1e-14


class LaurentPoly:
    """Finite sum ``sum_k c_k z^k`` over integer ``k`` with real coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        coeffs = dict(coeffs or {})
        self.coeffs = {
            int(k): float(v) for k, v in coeffs.items() if abs(v) > PRUNE_TOL
        }

    @classmethod
    def constant(cls, c):
        return cls({0: c})

    @classmethod
    def monomial(cls, c, k):
        return cls({k: c})

    @property
    def min_deg(self):
        return min(self.coeffs, default=0)

    @property
    def max_deg(self):
        return max(self.coeffs, default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self):
        if not self.coeffs:
            return "LaurentPoly(0)"
        terms = " + ".join(f"{c:.6g}*z^{k}" for k, c in sorted(self.coeffs.items()))
        return f"LaurentPoly({terms})"

    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            return other
        if np.isscalar(other):
            return LaurentPoly.constant(float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return LaurentPoly({k: c * other for k, c in self.coeffs.items()})
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        out = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                out[i + j] = out.get(i + j, 0.0) + a * b
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __call__(self, z):
        return sum((c * z**k for k, c in self.coeffs.items()), 0.0 * z)

    def reflect(self):
        """``p(z) -> p(1/z)``."""
        return LaurentPoly({-k: c for k, c in self.coeffs.items()})

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return (self - other).is_zero()

    __hash__ = None


Z = LaurentPoly.monomial(1.0, 1)
ZINV = LaurentPoly.monomial(1.0, -1)


class LaurentMatrix:
    """Square matrix with :class:`LaurentPoly` entries."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = [[e if isinstance(e, LaurentPoly) else LaurentPoly.constant(e) for e in row]
                for row in entries]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise InputError("LaurentMatrix needs a nonempty square array")
        self.entries = rows

    @classmethod
    def identity(cls, n=2):
        return cls([[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)])

    @classmethod
    def scalar(cls, p, n=2):
        p = p if isinstance(p, LaurentPoly) else LaurentPoly.constant(p)
        return cls([[p if i == j else LaurentPoly() for j in range(n)] for i in range(n)])

    @property
    def size(self):
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __repr__(self):
        return f"LaurentMatrix({self.entries!r})"

    def __add__(self, other):
        n = self.size
        return LaurentMatrix([[self[i, j] + other[i, j] for j in range(n)] for i in range(n)])

    def __neg__(self):
        return LaurentMatrix([[-e for e in row] for row in self.entries])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, LaurentMatrix):
            raise InputError("use @ for matrix products")
        return LaurentMatrix([[e * c for e in row] for row in self.entries])

    __rmul__ = __mul__

    def __matmul__(self, other):
        n = self.size
        if other.size != n:
            raise InputError("size mismatch")
        return LaurentMatrix([
            [sum((self[i, k] * other[k, j] for k in range(n)), LaurentPoly()) for j in range(n)]
            for i in range(n)
        ])

    def __call__(self, z) -> np.ndarray:
        return np.array([[e(z) for e in row] for row in self.entries])

    def trace(self) -> LaurentPoly:
        return sum((self[i, i] for i in range(self.size)), LaurentPoly())

    def det(self) -> LaurentPoly:
        if self.size != 2:
            raise InputError("det is implemented for 2x2 Laurent matrices")
        return self[0, 0] * self[1, 1] - self[0, 1] * self[1, 0]

    def reflect(self):
        """Entrywise ``z -> 1/z``."""
        return LaurentMatrix([[e.reflect() for e in row] for row in self.entries])

    def max_abs_coeff(self) -> float:
        return max(e.max_abs_coeff() for row in self.entries for e in row)

    @property
    def min_deg(self):
        return min(e.min_deg for row in self.entries for e in row if not e.is_zero())

    @property
    def max_deg(self):
        return max(e.max_deg for row in self.entries for e in row if not e.is_zero())


class RationalMatrix:
    """``numerator(z) / denominator(z)`` with a scalar Laurent denominator."""

    def __init__(self, numerator: LaurentMatrix, denominator: LaurentPoly):
        self.numerator = numerator
        self.denominator = denominator

    def __call__(self, z) -> np.ndarray:
        d = self.denominator(z)
        if abs(d) < 1e-300:
            raise InputError(f"denominator vanishes at z={z!r}")
        return self.numerator(z) / d
