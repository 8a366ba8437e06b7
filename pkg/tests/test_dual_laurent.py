import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from reflectlax import dual
from reflectlax.errors import EvaluationError
from reflectlax.laurent import Z, ZINV, LaurentMatrix, LaurentPoly
from reflectlax.output import read_csv, write_csv

small = st.floats(-2, 2, allow_nan=False)


def complex_step(fn, x, h=1e-30):
    """Independent derivative oracle: Im f(x + i h e_j) / h."""
    x = np.asarray(x, dtype=complex)
    out = []
    for j in range(len(x)):
        y = x.copy()
        y[j] += 1j * h
        out.append(np.imag(fn(y)) / h)
    return np.array(out)


def scalar_fn(x):
    M = dual.array([[x[0], x[1]], [x[2], x[0] * x[1]]])
    return dual.trace(dual.matrix_power(M, 3)) + dual.exp(x[2]) / (2.0 + x[1] ** 2)


def scalar_fn_np(x):
    M = np.array([[x[0], x[1]], [x[2], x[0] * x[1]]])
    return np.trace(np.linalg.matrix_power(M, 3)) + np.exp(x[2]) / (2.0 + x[1] ** 2)


@given(arrays(float, 3, elements=small))
def test_gradient_matches_complex_step(x):
    g = dual.gradient(scalar_fn, x)
    assert np.allclose(g, complex_step(scalar_fn_np, x), rtol=1e-10, atol=1e-10)


def test_jacobian_shape_and_values():
    fn = lambda x: dual.array([[x[0] * x[1], dual.log(x[0])], [dual.sqrt(x[1]), 1.0]])
    J = dual.jacobian(fn, np.array([2.0, 4.0]))
    assert J.shape == (2, 2, 2)
    assert np.allclose(J[0, 0], [4.0, 2.0])
    assert np.allclose(J[0, 1], [0.5, 0.0])
    assert np.allclose(J[1, 0], [0.0, 0.25])


def test_gradient_rejects_nonfinite():
    with pytest.raises(EvaluationError):
        dual.gradient(lambda x: dual.log(x[0]), np.array([-1.0]))


@given(st.dictionaries(st.integers(-3, 3), small, max_size=4),
       st.dictionaries(st.integers(-3, 3), small, max_size=4),
       st.floats(0.3, 3.0))
def test_laurent_arithmetic_matches_evaluation(a, b, z):
    p, q = LaurentPoly(a), LaurentPoly(b)
    assert np.isclose((p * q)(z), p(z) * q(z), atol=1e-9)
    assert np.isclose((p + q)(z), p(z) + q(z), atol=1e-12)
    assert np.isclose(p.reflect()(z), p(1 / z), atol=1e-9)


def test_laurent_pruning_and_degrees():
    p = (Z + ZINV) * (Z - ZINV)
    assert p == Z * Z - ZINV * ZINV
    assert (p.min_deg, p.max_deg) == (-2, 2)
    assert (Z * 1e-15).is_zero()


def test_laurent_matrix_det_and_trace():
    M = LaurentMatrix([[Z, 1.0], [2.0, ZINV]])
    assert M.det() == LaurentPoly.constant(-1.0)
    assert M.trace() == Z + ZINV
    assert np.allclose((M @ M)(1.7), M(1.7) @ M(1.7))


def test_csv_format(tmp_path):
    path = write_csv(tmp_path / "x.csv", ["t", "a"], [[0.1, 1 / 3]])
    text = path.read_bytes()
    assert b"\r" not in text
    assert text.splitlines()[1] == b"0.10000000000000001,0.33333333333333331"
    header, data = read_csv(path)
    assert header == ["t", "a"] and data[0, 1] == 1 / 3
