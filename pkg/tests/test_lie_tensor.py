from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from reflectlax import algebras as A
from reflectlax import lie_tensor as lt
from reflectlax.errors import InputError, UnsupportedError

floats = st.floats(-3, 3, allow_nan=False)


def vec(dim):
    return arrays(float, dim, elements=floats)


@pytest.fixture(scope="module")
def sl2():
    return A.sl(2)


@pytest.mark.parametrize("name", sorted(A.ALGEBRA_PRESETS))
def test_presets_satisfy_structure_axioms(name):
    alg = A.algebra(name)
    assert max(alg.structure_defects().values()) <= 1e-12


def test_sl2_brackets(sl2):
    E, H, F = (sl2.basis_vector(x) for x in ("E", "H", "F"))
    assert np.allclose(lt.bracket(sl2, H, E), 2 * E)
    assert np.allclose(lt.bracket(sl2, E, F), H)


@given(vec(8), vec(8))
def test_sl3_bracket_matches_matrix_commutator(x, y):
    alg = A.sl(3)
    X, Y = alg.to_matrix(x), alg.to_matrix(y)
    assert np.abs(alg.to_matrix(lt.bracket(alg, x, y)) - (X @ Y - Y @ X)).max() <= 1e-12 * (1 + np.abs(X).max() * np.abs(Y).max())


@given(vec(3))
def test_self_bracket_vanishes(x):
    assert np.abs(lt.bracket(A.sl(2), x, x)).max() == 0


def test_cobracket_on_sl2(sl2):
    r = A.skew_r_matrix(sl2)
    E, H, F = (sl2.basis_vector(x) for x in ("E", "H", "F"))
    assert np.abs(lt.cobracket(sl2, r, H)).max() == 0
    assert np.allclose(lt.cobracket(sl2, r, E), lt.wedge(E, H))
    assert np.abs(lt.cobracket(sl2, np.zeros((3, 3)), E)).max() == 0


@given(arrays(float, (3, 3), elements=floats))
def test_identity_automorphism_kills_cre(r):
    alg = A.sl(2)
    assert lt.max_abs(lt.cre_defect(alg, r, A.identity_automorphism(alg))) == 0


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_skew_r_solves_cre_for_cartan_involution(n):
    alg = A.sl(n)
    r = A.skew_r_matrix(alg)
    theta = A.cartan_involution(alg)
    assert lt.max_abs(lt.cre_defect(alg, r, theta)) <= 1e-12
    assert lt.max_abs(lt.cre_defect(alg, r, theta, exact=True)) == Fraction(0)


def test_double_r_matrix_solves_cre_under_swap():
    d = A.sl2_plus_sl2()
    rd = A.double_r_matrix(A.sl(2), A.standard_r_matrix(A.sl(2)))
    assert lt.max_abs(lt.cre_defect(d, rd, A.swap_involution(d))) <= 1e-12


def test_cybe(sl2):
    assert lt.max_abs(lt.cybe_defect(sl2, np.zeros((3, 3)))) == 0
    r_std = A.standard_r_matrix(sl2)
    assert lt.max_abs(lt.cybe_defect(sl2, r_std)) <= 1e-12
    assert lt.max_abs(lt.cybe_defect(sl2, r_std, exact=True)) == 0
    # skew part alone is not a solution; regression value of the exact norm
    assert lt.max_abs(lt.cybe_defect(sl2, A.skew_r_matrix(sl2), exact=True)) == 1


def _rep_cybe(alg, r):
    """[r12, r13] + [r12, r23] + [r13, r23] in the defining representation."""
    rho = alg.matrix_rep
    n = rho.shape[1]
    R = np.einsum("ab,aij,bkl->ikjl", r, rho, rho).reshape(n * n, n * n)
    I = np.eye(n)
    r12 = np.kron(R, I)
    r23 = np.kron(I, R)
    R4 = R.reshape(n, n, n, n)
    r13 = np.einsum("ikjl,mp->imkjpl", R4, I).reshape(n**3, n**3)
    c = lambda x, y: x @ y - y @ x
    return c(r12, r13) + c(r12, r23) + c(r13, r23)


@pytest.mark.parametrize("n", [2, 3])
def test_cybe_tensor_matches_representation(n):
    alg = A.sl(n)
    rho = alg.matrix_rep
    for r in (A.skew_r_matrix(alg), A.standard_r_matrix(alg),
              np.random.default_rng(n).standard_normal((alg.dim, alg.dim))):
        T = lt.cybe_defect(alg, r)
        lifted = np.einsum("abc,aij,bkl,cmp->ikmjlp", T, rho, rho, rho).reshape(n**3, n**3)
        assert np.abs(lifted - _rep_cybe(alg, r)).max() <= 1e-12 * (1 + np.abs(r).max() ** 2)


def test_standard_r_on_sl2_is_ef_plus_quarter_hh(sl2):
    r = A.standard_r_matrix(sl2)
    E, H, F = (sl2.index(x) for x in ("E", "H", "F"))
    expected = np.zeros((3, 3))
    expected[E, F] = 1
    expected[H, H] = 0.25
    assert np.allclose(r, expected)


@given(vec(3), vec(3), st.floats(-3, 3))
def test_mcybe_properties(x, y, a):
    alg = A.sl(2)
    r = A.standard_r_matrix(alg)
    assert lt.max_abs(lt.mcybe_defect(alg, r, x, y)) <= 1e-10 * (1 + np.abs(x).max() * np.abs(y).max())
    r_bad = A.skew_r_matrix(alg) + np.diag([1.0, 0.3, -0.7])
    d1 = lt.mcybe_defect(alg, r_bad, a * x, y)
    d2 = a * lt.mcybe_defect(alg, r_bad, x, y)
    assert np.allclose(d1, d2, atol=1e-9)
    assert lt.max_abs(lt.mcybe_defect(alg, r_bad, x, x)) <= 1e-9


def test_operator_form(sl2):
    assert np.abs(lt.operator_form(sl2, np.zeros((3, 3)))).max() == 0
    assert np.allclose(lt.operator_form(sl2, lt.casimir(sl2)), np.eye(3))
    t1, t2 = np.arange(9.0).reshape(3, 3), np.eye(3)[::-1]
    assert np.allclose(lt.operator_form(sl2, 2.5 * t1 + t2),
                       2.5 * lt.operator_form(sl2, t1) + lt.operator_form(sl2, t2))


def test_fixed_subalgebra_sl2_theta(sl2):
    dec = lt.fixed_subalgebra(sl2, A.cartan_involution(sl2))
    assert dec.fixed.dim == 1 and dec.complement_dim == 2
    E, H, F = (sl2.basis_vector(x) for x in ("E", "H", "F"))
    k = dec.fixed.vectors[0]
    assert np.linalg.matrix_rank(np.vstack([k, E - F])) == 1
    p = dec.eigenspaces[0].basis.vectors
    assert np.linalg.matrix_rank(np.vstack([p, H, E + F])) == 2


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_fixed_subalgebra_is_so(n):
    alg = A.sl(n)
    dec = lt.fixed_subalgebra(alg, A.cartan_involution(alg))
    assert dec.fixed.dim == n * (n - 1) // 2
    assert dec.fixed.closure_defect(alg) <= 1e-12


def test_swap_fixes_the_diagonal():
    d = A.sl2_plus_sl2()
    k = lt.fixed_subalgebra(d, A.swap_involution(d)).fixed
    assert k.dim == 3
    assert np.allclose(k.vectors[:, :3], k.vectors[:, 3:])


def test_cyclic_automorphism_has_order_n_and_complex_eigenspaces():
    alg = A.sl(3)
    sigma = A.cyclic_permutation(alg)
    assert sigma.defects(alg)["order"] <= 1e-12
    lams = [lam for lam, _ in lt.eigen_projectors(sigma)]
    assert any(np.iscomplex(lam) for lam in lams)
    projs = [P for _, P in lt.eigen_projectors(sigma)]
    assert np.allclose(sum(projs), np.eye(alg.dim))


def test_eigen_projectors_need_an_order(sl2):
    with pytest.raises(UnsupportedError):
        lt.eigen_projectors(lt.Automorphism(np.eye(3)))


def test_block_decomposition(sl2):
    theta = A.cartan_involution(sl2)
    assert lt.r_block_decomposition(sl2, A.skew_r_matrix(sl2), theta).pp_norm <= 1e-12
    assert lt.r_block_decomposition(sl2, A.standard_r_matrix(sl2), theta).pp_norm > 0.1
    r = np.random.default_rng(0).standard_normal((3, 3))
    bd = lt.r_block_decomposition(sl2, r, A.identity_automorphism(sl2))
    assert bd.pp_norm == 0 and np.allclose(bd.kk, r)
    bd = lt.r_block_decomposition(sl2, r, theta)
    assert np.allclose(bd.total(), r)


@given(arrays(float, (8, 8), elements=floats))
def test_cre_vanishes_iff_pp_block_vanishes(r):
    alg = A.sl(3)
    sigma = A.cyclic_permutation(alg)
    bd = lt.r_block_decomposition(alg, r, sigma)
    r0 = r - np.real(bd.pp)
    assert lt.max_abs(lt.cre_defect(alg, r0, sigma)) <= 1e-10 * (1 + np.abs(r).max())
    if bd.pp_norm > 1e-6:
        assert lt.max_abs(lt.cre_defect(alg, r, sigma)) > 1e-10


def test_invariance_defect(sl2):
    full = lt.SubalgebraBasis(np.eye(3), "g")
    assert lt.invariance_defect(sl2, lt.casimir(sl2), full) <= 1e-12
    theta = A.cartan_involution(sl2)
    k = lt.fixed_subalgebra(sl2, theta).fixed
    r = A.standard_r_matrix(sl2)
    J = 0.5 * (r + r.T)
    assert lt.invariance_defect(sl2, lt.cre_defect(sl2, J, theta), k) <= 1e-12
    E = sl2.basis_vector("E")
    assert lt.invariance_defect(sl2, np.outer(E, E), k) > 0.1


def test_invalid_inputs(sl2):
    with pytest.raises(InputError):
        lt.cre_defect(sl2, np.zeros((3, 3)), lt.Automorphism(np.eye(4)))
    with pytest.raises(InputError):
        lt.SubalgebraBasis(np.array([[1.0, 0, 0], [2.0, 0, 0]]))
    with pytest.raises(InputError):
        lt.to_exact(np.array([np.pi]), max_denominator=10)


def test_algebra_file_round_trip(tmp_path):
    alg = A.sl(3)
    path = tmp_path / "sl3.json"
    A.save_algebra(alg, path)
    back = A.load_algebra(path)
    assert np.allclose(back.structure_constants, alg.structure_constants)
    assert np.allclose(back.trace_form, alg.trace_form)
    assert back.positive_roots == alg.positive_roots


def test_algebra_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x",\n "dim": }')
    with pytest.raises(InputError, match="line 2 column"):
        A.load_algebra(bad)
    with pytest.raises(InputError, match="unknown keys"):
        A.algebra_from_dict({"dim": 1, "basis_labels": ["a"], "structure_constants": [], "color": 1})
