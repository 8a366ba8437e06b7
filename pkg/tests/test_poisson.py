import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from reflectlax import dual, toda, xxz
from reflectlax.errors import InputError, StiffnessError
from reflectlax.poisson import (
    Observable,
    PoissonStructure,
    commutation_report,
    constant,
    coordinate,
    hamiltonian_vector_field,
    independence_rank,
    integrate_flow,
    jacobi_defect,
    poisson_bracket,
    sample_states,
)

coords = st.floats(-1, 1, allow_nan=False)


def toda_a(n, k):
    """a_k = exp(q_{k-1} - q_k), k = 1..n+1, as an observable on (p, q)."""
    def fn(x):
        qq = [0.0, *[x[n + i] for i in range(n)], 0.0]
        return dual.exp(qq[k - 1] - qq[k])
    return Observable(fn, f"a{k}")


@given(arrays(float, 6, elements=coords))
def test_toda_canonical_and_ab_brackets(x):
    n = 3
    ps = toda.poisson_structure(n)
    for k in range(n):
        assert np.isclose(poisson_bracket(ps, coordinate(ps, k), coordinate(ps, n + k), x), 1.0)
    for k in range(1, n + 1):
        a = toda_a(n, k)
        b = Observable(lambda y, k=k: dual.exp(y[k - 1]), f"b{k}")
        assert np.isclose(poisson_bracket(ps, a, b, x), a.value(x) * b.value(x), rtol=1e-12)


def xxz_site_state(k, e, f):
    return np.array([k, e, f])


@given(st.floats(0.3, 3), st.floats(-2, 2), st.floats(-2, 2))
def test_xxz_casimir_is_central(k, e, f):
    ps = xxz.poisson_structure(1)
    s = xxz_site_state(k, e, f)
    om = xxz.omega_observable(1)
    for i in range(3):
        assert abs(poisson_bracket(ps, om, coordinate(ps, i), s)) <= 1e-10 * (1 + k**3 + abs(e) + abs(f))
    assert np.abs(hamiltonian_vector_field(ps, om, s)).max() <= 1e-10 * (1 + k**3)


@given(arrays(float, 3, elements=st.floats(0.3, 2)))
def test_jacobi_and_antisymmetry(x):
    for ps, s in ((xxz.poisson_structure(1), x), (toda.poisson_structure(1), x[:2])):
        P = ps.tensor(s)
        assert np.abs(P + P.T).max() == 0
        assert jacobi_defect(ps, s) <= 1e-12


def test_toda_vector_field_by_hand():
    n = 2
    ps = toda.poisson_structure(n)
    x = np.array([0.3, -0.2, 0.1, 0.4])
    v = hamiltonian_vector_field(ps, toda.hamiltonian_observable(n, 1), x)
    # H = sum e^{2(q_{k-1}-q_k)} + sum e^{2 p_k}: dq_k/dt = dH/dp_k = 2 e^{2 p_k}
    assert np.allclose(v[n:], 2 * np.exp(2 * x[:n]))
    assert np.abs(hamiltonian_vector_field(ps, constant(3.0), x)).max() == 0


def test_zero_hamiltonian_gives_constant_trajectory():
    ps = toda.poisson_structure(2)
    x0 = np.array([0.1, 0.2, 0.3, 0.4])
    traj = integrate_flow(ps, constant(0.0), x0, 1.0, 0.1)
    assert np.all(traj.states == x0)


def test_harmonic_oscillator_fourth_order():
    ps = PoissonStructure(2, ("p", "q"), lambda s: np.array([[0.0, 1.0], [-1.0, 0.0]]))
    H = Observable(lambda s: 0.5 * (s[0] * s[0] + s[1] * s[1]), "H")
    errs = []
    for dt in (0.1, 0.05):
        tr = integrate_flow(ps, H, [0.0, 1.0], 2.0, dt)
        # dq/dt = p, dp/dt = -q with q(0) = 1
        errs.append(abs(tr.states[-1][1] - np.cos(2.0)))
    assert 12 < errs[0] / errs[1] < 20


def test_adaptive_steps_and_output_times():
    ps = toda.poisson_structure(2)
    H = toda.hamiltonian_observable(2, 1)
    tr = integrate_flow(ps, H, [0.1, 0.2, 0.3, 0.4], 1.0, 0.5, tol=1e-10, output_times=[0.25, 0.5])
    assert list(tr.times) == [0.0, 0.25, 0.5, 1.0]
    with pytest.raises(StiffnessError):
        integrate_flow(ps, H, [0.1, 0.2, 0.3, 0.4], 1.0, 0.5, tol=1e-30, max_steps=2_000)
    with pytest.raises(InputError):
        integrate_flow(ps, H, [0.1, 0.2, 0.3, 0.4], -1.0, 0.1)


def test_stop_on_returns_partial_trajectory():
    ps = PoissonStructure(2, ("p", "q"), lambda s: np.array([[0.0, 1.0], [-1.0, 0.0]]))

    def fn(s):
        if dual.value(s[1]) > 0.5:
            raise ValueError("left the chart")
        return s[0]  # dq/dt = 1
    tr = integrate_flow(ps, Observable(fn, "H"), [0.0, 0.0], 2.0, 0.1, stop_on=(ValueError,))
    assert tr.flags["stopped_at"] == pytest.approx(0.5)
    assert "left the chart" in tr.flags["stop_reason"]


def test_commutation_report_and_rank(rng):
    ps = toda.poisson_structure(1)
    rep = commutation_report(ps, [coordinate(ps, 1), coordinate(ps, 0)], [np.zeros(2)])
    assert rep.matrix[0, 1] == 1.0
    assert rep.to_dict()["labels"] == ["q1", "p1"]
    q1 = coordinate(ps, 1)
    q1sq = Observable(lambda s: s[1] * s[1], "q1^2")
    assert independence_rank(ps, [q1, q1sq], np.array([0.2, 0.7])) == 1

    ps3 = toda.poisson_structure(3)
    obs = [toda.hamiltonian_observable(3, m) for m in (1, 2, 3)]
    samples = toda.random_chart_samples(3, 50, rng)
    assert commutation_report(ps3, obs, samples, workers=4).max_offdiag() <= 1e-9
    ps2 = toda.poisson_structure(2)
    assert independence_rank(ps2, [toda.hamiltonian_observable(2, m) for m in (1, 2)], samples[0][:4]) == 2


def test_xxz_transfer_commutation_report(rng):
    c = xxz.ChainState.random(2, 1.5, rng)
    obs = [xxz.transfer_observable(z, 2.0, 2.0) for z in (1.1, 1.35, 1.6)]
    assert commutation_report(xxz.poisson_structure(2), obs, [c.coords]).max_offdiag() <= 1e-8


def test_sample_states_rejects(rng):
    states = sample_states(np.zeros(3), 1.0, 20, rng, reject=lambda s: s[0] < 0)
    assert len(states) == 20 and all(s[0] >= 0 for s in states)
