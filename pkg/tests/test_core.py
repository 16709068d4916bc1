import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from infermpc.core import Problem, Trajectory, batch_costs, rollout, trajectory_cost
from infermpc.errors import NumericalDomainError, ParameterError, ShapeError
from infermpc.posterior import sinusoid_cost

from conftest import double_integrator, integrator_1d


def test_integrator_states(integrator):
    traj = rollout(integrator, [0.0], [[1.0], [1.0], [1.0]])
    np.testing.assert_array_equal(traj.states[:, 0], [0.0, 1.0, 2.0, 3.0])
    assert traj.total_cost == 3.0


def test_fixed_point_stays_put():
    p = double_integrator(horizon=5)
    traj = rollout(p, [0.0, 0.0], np.zeros((5, 1)))
    assert np.all(traj.states == 0.0)


def test_double_integrator_single_step_by_hand():
    # v1 = v0 + dt*a = 0.1, p1 = p0 + dt*v1 = 0.01
    traj = rollout(double_integrator(horizon=1, dt=0.1), [0.0, 0.0], [[1.0]])
    np.testing.assert_allclose(traj.states[1], [0.01, 0.1], rtol=0, atol=1e-15)


def test_inputs_are_clamped_before_dynamics():
    p = integrator_1d(lo=-0.5, hi=0.5)
    traj = rollout(p, [0.0], [[2.0], [-3.0], [0.25]])
    np.testing.assert_array_equal(traj.inputs[:, 0], [0.5, -0.5, 0.25])
    np.testing.assert_array_equal(traj.states[:, 0], [0.0, 0.5, 0.0, 0.25])


def test_shape_errors(integrator):
    with pytest.raises(ShapeError):
        rollout(integrator, [0.0, 1.0], np.zeros((3, 1)))
    with pytest.raises(ShapeError):
        rollout(integrator, [0.0], np.zeros((2, 1)))


def test_nonfinite_state_names_step():
    p = Problem(horizon=4, state_dim=1, input_dim=1,
                dynamics=lambda x, u: np.where(u > 0.5, np.inf, x + u),
                stage_cost=lambda x, u, t: np.zeros(np.shape(x)[:-1]))
    with pytest.raises(NumericalDomainError) as exc:
        rollout(p, [0.0], [[0.0], [0.0], [1.0], [0.0]])
    assert exc.value.step == 2


def test_problem_validation():
    with pytest.raises(ParameterError):
        Problem(horizon=0, state_dim=1, input_dim=1, dynamics=None, stage_cost=None)
    with pytest.raises(ParameterError):
        Problem(horizon=1, state_dim=1, input_dim=1, dynamics=None, stage_cost=None, input_lower=[1.0], input_upper=[0.0])


def test_cost_zero_case():
    p = Problem(horizon=3, state_dim=1, input_dim=1, dynamics=lambda x, u: x + u,
                stage_cost=lambda x, u, t: np.zeros(np.shape(x)[:-1]))
    assert rollout(p, [1.0], np.ones((3, 1))).total_cost == 0.0


def test_quadratic_cost_arithmetic():
    p = integrator_1d(horizon=2)
    assert rollout(p, [0.0], [[1.0], [2.0]]).total_cost == 5.0


def test_sinusoid_cost_scalar_oracle():
    p = Problem(horizon=1, state_dim=1, input_dim=1, dynamics=lambda x, u: x,
                stage_cost=lambda x, u, t: sinusoid_cost(np.asarray(u)[..., 0]))
    expected = 0.6 * (-2.0) ** 2 * math.sin(5 * math.pi * -2.0)
    assert rollout(p, [0.0], [[-2.0]]).total_cost == pytest.approx(expected, abs=1e-15)


def test_nonfinite_cost_raises(integrator):
    traj = Trajectory(states=np.zeros((4, 1)), inputs=np.array([[np.inf], [0.0], [0.0]]), total_cost=0.0)
    with pytest.raises(NumericalDomainError):
        trajectory_cost(integrator, traj)


def test_trajectory_cost_matches_rollout(dbl):
    rng = np.random.default_rng(3)
    u = rng.normal(size=(8, 1))
    traj = rollout(dbl, [1.0, -0.5], u)
    assert trajectory_cost(dbl, traj) == traj.total_cost
    expected = sum(float(dbl.stage_cost(traj.states[t], traj.inputs[t], t)) for t in range(8))
    expected += float(dbl.terminal_cost(traj.states[-1]))
    assert traj.total_cost == expected


finite = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (8, 1), elements=finite), st.tuples(finite, finite))
def test_rollout_invariants(u, x0):
    p = double_integrator(horizon=8)
    a = rollout(p, list(x0), u)
    b = rollout(p, list(x0), u)
    np.testing.assert_array_equal(a.states, b.states)
    assert a.total_cost == b.total_cost
    np.testing.assert_array_equal(a.states[0], x0)
    for t in range(8):
        np.testing.assert_array_equal(a.states[t + 1], p.dynamics(a.states[t], a.inputs[t]))
    # clamp idempotence
    c = rollout(p, list(x0), a.inputs)
    np.testing.assert_array_equal(c.states, a.states)
    assert c.total_cost == a.total_cost


@settings(max_examples=30, deadline=None)
@given(arrays(float, (6, 1), elements=finite), st.integers(1, 5))
def test_cost_additivity(u, split):
    full = integrator_1d(horizon=6)
    head = integrator_1d(horizon=split)
    tail = integrator_1d(horizon=6 - split)
    whole = rollout(full, [0.5], u)
    first = rollout(head, [0.5], u[:split])
    rest = rollout(tail, first.states[-1], u[split:])
    assert whole.total_cost == pytest.approx(first.total_cost + rest.total_cost, rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(rest.states, whole.states[split:])


def test_batch_costs_match_single_rollouts(dbl):
    rng = np.random.default_rng(0)
    batch = dbl.clamp(rng.normal(size=(20, 8, 1)) * 3)
    costs = batch_costs(dbl, [0.3, 0.0], batch)
    for k in range(20):
        assert costs[k] == rollout(dbl, [0.3, 0.0], batch[k]).total_cost


def test_batch_costs_mark_nonfinite_as_inf():
    p = Problem(horizon=2, state_dim=1, input_dim=1, dynamics=lambda x, u: x / u,
                stage_cost=lambda x, u, t: x[..., 0])
    costs = batch_costs(p, [1.0], np.array([[[1.0], [1.0]], [[0.0], [1.0]]]))
    assert costs[0] == 2.0 and costs[1] == np.inf
