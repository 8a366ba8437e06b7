"""Bundled Lie algebras, automorphisms and r-matrices, plus a JSON loader.

Basis ordering for ``sl(n)``: positive root vectors ``E_ij`` (i < j),
Chevalley Cartan elements ``H_i = E_ii - E_{i+1,i+1}``, then negative root
vectors ``F_ij = E_ji`` in the same order as the ``E``'s.  For ``sl(2)``
this is the ``E, H, F`` basis.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InputError
from .lie_tensor import Automorphism, LieAlgebraData, casimir, jacobi_tensor  # noqa: F401


def _unit(n, i, j):
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


def from_matrices(name, labels, mats, positive_roots=(), cartan=()) -> LieAlgebraData:
    """Algebra spanned by the given matrices; constants from commutators,
    trace form ``B(x, y) = tr(xy)``."""
    rho = np.array(mats, dtype=float)
    d = len(rho)
    flat = rho.reshape(d, -1).T
    pinv = np.linalg.pinv(flat)
    c = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            comm = rho[i] @ rho[j] - rho[j] @ rho[i]
            coeffs = pinv @ comm.ravel()
            if np.abs(flat @ coeffs - comm.ravel()).max() > 1e-10:
                raise InputError(f"{name}: matrices do not close under the commutator")
            c[i, j] = coeffs
    c[np.abs(c) < 1e-14] = 0.0
    B = np.einsum("iab,jba->ij", rho, rho)
    alg = LieAlgebraData(
        name, tuple(labels), c, B, rho, tuple(positive_roots), tuple(cartan)
    )
    alg.validate()
    return alg


def sl(n: int) -> LieAlgebraData:
    if n < 2:
        raise InputError("sl(n) needs n >= 2")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mats, labels = [], []
    for i, j in pairs:
        mats.append(_unit(n, i, j))
        labels.append(f"E{i + 1}{j + 1}" if n > 2 else "E")
    for i in range(n - 1):
        mats.append(_unit(n, i, i) - _unit(n, i + 1, i + 1))
        labels.append(f"H{i + 1}" if n > 2 else "H")
    for i, j in pairs:
        mats.append(_unit(n, j, i))
        labels.append(f"F{i + 1}{j + 1}" if n > 2 else "F")
    npos = len(pairs)
    roots = [(a, npos + n - 1 + a) for a in range(npos)]
    cartan = list(range(npos, npos + n - 1))
    return from_matrices(f"sl{n}", labels, mats, roots, cartan)


def gl2() -> LieAlgebraData:
    E = _unit(2, 0, 1)
    H = np.diag([1.0, -1.0])
    F = _unit(2, 1, 0)
    I = np.eye(2)
    return from_matrices("gl2", ["E", "H", "F", "I"], [E, H, F, I], [(0, 2)], [1, 3])


def direct_sum(a: LieAlgebraData, b: LieAlgebraData, name=None) -> LieAlgebraData:
    """``a (+) b`` with basis ``(x_i, 0)`` followed by ``(0, y_j)``."""
    da, db = a.dim, b.dim
    d = da + db
    c = np.zeros((d, d, d))
    c[:da, :da, :da] = a.structure_constants
    c[da:, da:, da:] = b.structure_constants
    B = np.zeros((d, d))
    B[:da, :da] = a.trace_form
    B[da:, da:] = b.trace_form
    rep = None
    if a.matrix_rep is not None and b.matrix_rep is not None:
        na, nb = a.matrix_rep.shape[1], b.matrix_rep.shape[1]
        rep = np.zeros((d, na + nb, na + nb))
        rep[:da, :na, :na] = a.matrix_rep
        rep[da:, na:, na:] = b.matrix_rep
    labels = [f"({x},0)" for x in a.basis_labels] + [f"(0,{y})" for y in b.basis_labels]
    roots = list(a.positive_roots) + [(i + da, j + da) for i, j in b.positive_roots]
    cartan = list(a.cartan) + [i + da for i in b.cartan]
    alg = LieAlgebraData(
        name or f"{a.name}+{b.name}", tuple(labels), c, B, rep, tuple(roots), tuple(cartan)
    )
    alg.validate()
    return alg


# automorphisms -----------------------------------------------------------------


def identity_automorphism(alg: LieAlgebraData) -> Automorphism:
    return Automorphism(np.eye(alg.dim), 1, "id")


def cartan_involution(alg: LieAlgebraData) -> Automorphism:
    """``theta(x) = -x^T`` in the bundled matrix representation."""
    cols = [alg.coordinates(-m.T) for m in alg.matrix_rep]
    s = np.array(cols).T
    s[np.abs(s) < 1e-14] = 0.0
    return Automorphism(s, 2, "theta")


def conjugation_automorphism(alg: LieAlgebraData, g, order_hint=None, label="Ad") -> Automorphism:
    g = np.asarray(g, dtype=float)
    gi = np.linalg.inv(g)
    cols = [alg.coordinates(g @ m @ gi) for m in alg.matrix_rep]
    s = np.array(cols).T
    s[np.abs(s) < 1e-14] = 0.0
    return Automorphism(s, order_hint, label)


def cyclic_permutation(alg: LieAlgebraData) -> Automorphism:
    """Conjugation by the cyclic shift matrix: finite order ``n`` on ``sl(n)``."""
    n = alg.matrix_rep.shape[1]
    P = np.roll(np.eye(n), 1, axis=0)
    return conjugation_automorphism(alg, P, n, f"Ad(cyclic{n})")


def swap_involution(alg: LieAlgebraData) -> Automorphism:
    """``(x, y) -> (y, x)`` on a direct sum of two equal summands."""
    if alg.dim % 2:
        raise InputError("swap needs an even-dimensional direct sum")
    h = alg.dim // 2
    s = np.zeros((alg.dim, alg.dim))
    s[:h, h:] = np.eye(h)
    s[h:, :h] = np.eye(h)
    return Automorphism(s, 2, "swap")


# r-matrices ---------------------------------------------------------------------


def skew_r_matrix(alg: LieAlgebraData) -> np.ndarray:
    """``sum_{alpha > 0} E_alpha ^ F_alpha``."""
    r = np.zeros((alg.dim, alg.dim))
    for e, f in alg.positive_roots:
        r[e, f] += 1.0
        r[f, e] -= 1.0
    return r


def standard_r_matrix(alg: LieAlgebraData) -> np.ndarray:
    """Quasitriangular ``sum E_alpha (x) F_alpha + (1/2) Omega_h``.

    Its symmetric part is half the Casimir, e.g. ``E(x)F + H(x)H/4`` on sl2.
    """
    r = np.zeros((alg.dim, alg.dim))
    for e, f in alg.positive_roots:
        r[e, f] += 1.0
    h = list(alg.cartan)
    omega = casimir(alg)
    r[np.ix_(h, h)] += 0.5 * omega[np.ix_(h, h)]
    return r


def double_r_matrix(alg: LieAlgebraData, r: np.ndarray) -> np.ndarray:
    """``r_d = sum_i (x_i, x_i) (x) (r_+(xi_i), r_-(xi_i))`` on ``g (+) g``.

    ``r_+`` contracts ``r`` in its first leg and ``r_-`` contracts ``-r_21``.
    """
    d = alg.dim
    rd = np.zeros((2 * d, 2 * d))
    for i in range(d):
        u = np.zeros(2 * d)
        u[i] = u[d + i] = 1.0
        v = np.concatenate([r[i, :], -r[:, i]])
        rd += np.outer(u, v)
    return rd


# presets ------------------------------------------------------------------------


def sl2_plus_sl2() -> LieAlgebraData:
    return direct_sum(sl(2), sl(2), "sl2+sl2")


ALGEBRA_PRESETS = {
    "sl2": lambda: sl(2),
    "sl3": lambda: sl(3),
    "sl4": lambda: sl(4),
    "sl5": lambda: sl(5),
    "gl2": gl2,
    "sl2+sl2": sl2_plus_sl2,
}

AUTOMORPHISM_PRESETS = {
    "identity": identity_automorphism,
    "theta": cartan_involution,
    "cyclic": cyclic_permutation,
    "swap": swap_involution,
}


def algebra(name: str) -> LieAlgebraData:
    try:
        return ALGEBRA_PRESETS[name]()
    except KeyError:
        raise InputError(f"unknown algebra preset {name!r}; known: {sorted(ALGEBRA_PRESETS)}") from None


def automorphism(name: str, alg: LieAlgebraData) -> Automorphism:
    try:
        factory = AUTOMORPHISM_PRESETS[name]
    except KeyError:
        raise InputError(
            f"unknown automorphism {name!r}; known: {sorted(AUTOMORPHISM_PRESETS)}"
        ) from None
    return factory(alg)


# file format --------------------------------------------------------------------


def _killing_form(c: np.ndarray) -> np.ndarray:
    # tr(ad_x_i ad_x_j) with (ad_x_i)[k, l] = c[i, l, k]
    return np.einsum("ilk,jkl->ij", c, c)


def load_algebra(path) -> LieAlgebraData:
    """Read an algebra definition.

    JSON object with ``name``, ``dim``, ``basis_labels``,
    ``structure_constants`` as ``[i, j, k, value]`` quadruples (only nonzero
    entries; antisymmetric partners must be listed too), optional
    ``matrix_rep`` (list of row-major square matrices), optional
    ``trace_form``, ``positive_roots`` and ``cartan``.  Without a trace form
    or matrix representation the Killing form is used.
    """
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return algebra_from_dict(doc)


def algebra_from_dict(doc: dict) -> LieAlgebraData:
    allowed = {
        "name", "dim", "basis_labels", "structure_constants",
        "matrix_rep", "trace_form", "positive_roots", "cartan",
    }
    unknown = set(doc) - allowed
    if unknown:
        raise InputError(f"unknown keys in algebra definition: {sorted(unknown)}")
    try:
        d = int(doc["dim"])
        labels = tuple(doc["basis_labels"])
        quads = doc["structure_constants"]
    except KeyError as exc:
        raise InputError(f"algebra definition is missing {exc.args[0]!r}") from None
    if len(labels) != d:
        raise InputError("basis_labels length differs from dim")
    c = np.zeros((d, d, d))
    for q in quads:
        if len(q) != 4:
            raise InputError(f"structure constant entry {q!r} is not (i, j, k, value)")
        i, j, k, v = q
        c[int(i), int(j), int(k)] = float(v)
    rep = None
    if doc.get("matrix_rep") is not None:
        rep = np.array(doc["matrix_rep"], dtype=float)
        if rep.ndim == 2:  # row-major flattened
            n = int(round(np.sqrt(rep.shape[1])))
            rep = rep.reshape(d, n, n)
    if doc.get("trace_form") is not None:
        B = np.array(doc["trace_form"], dtype=float)
    elif rep is not None:
        B = np.einsum("iab,jba->ij", rep, rep)
    else:
        B = _killing_form(c)
    alg = LieAlgebraData(
        doc.get("name", "custom"), labels, c, B, rep,
        tuple(tuple(p) for p in doc.get("positive_roots", ())),
        tuple(doc.get("cartan", ())),
    )
    alg.validate()
    return alg


def algebra_to_dict(alg: LieAlgebraData) -> dict:
    c = alg.structure_constants
    quads = [
        [int(i), int(j), int(k), float(c[i, j, k])]
        for i, j, k in zip(*np.nonzero(c))
    ]
    doc = {
        "name": alg.name,
        "dim": alg.dim,
        "basis_labels": list(alg.basis_labels),
        "structure_constants": quads,
        "trace_form": alg.trace_form.tolist(),
        "positive_roots": [list(p) for p in alg.positive_roots],
        "cartan": list(alg.cartan),
    }
    if alg.matrix_rep is not None:
        doc["matrix_rep"] = [m.ravel().tolist() for m in alg.matrix_rep]
    return doc


def save_algebra(alg: LieAlgebraData, path) -> None:
    Path(path).write_text(json.dumps(algebra_to_dict(alg), indent=1) + "\n")
