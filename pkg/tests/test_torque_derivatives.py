import numpy as np
import pytest

from closedchain import actuation_jacobian, map_hessians, torque_jacobian
from closedchain.verify import sample_configurations

import oracles


def _fd_torque_map(params, q, tau_m, h=3e-5):
    # fourth-order stencil: near the workspace edge the torque map's third
    # derivative is large enough to swamp a second-order difference
    def tau_at(x):
        return np.asarray(actuation_jacobian(params, x)).T @ tau_m

    return oracles.central_difference(tau_at, q, h, order=4)


def test_zero_motor_torque_gives_zero_derivative(knee_params):
    diff = torque_jacobian(knee_params, np.array([1.0]), np.zeros(1))
    assert np.abs(diff.d_tau_dq).max() == 0.0
    assert np.abs(diff.tau_s).max() == 0.0


def test_parallelogram_derivative_vanishes(knee_par_params):
    # constant unit ratio: the serial torque cannot depend on configuration
    for q in (0.4, 1.5, 2.7):
        diff = torque_jacobian(knee_par_params, np.array([q]), np.array([3.0]))
        assert np.abs(diff.d_tau_dq).max() < 1e-9


def test_knee_matches_difference_oracle(knee_params, rng):
    for q in sample_configurations(knee_params, 60, rng):
        tau_m = rng.uniform(-2.0, 2.0, 1)
        diff = torque_jacobian(knee_params, q, tau_m)
        fd = _fd_torque_map(knee_params, q, tau_m)
        assert np.abs(diff.d_tau_dq - fd).max() < 1e-5 * max(1.0, np.abs(tau_m).max())


def test_ankle_matches_difference_oracle(ankle_params, rng):
    for q in sample_configurations(ankle_params, 60, rng):
        tau_m = rng.uniform(-2.0, 2.0, 2)
        diff = torque_jacobian(ankle_params, q, tau_m)
        fd = _fd_torque_map(ankle_params, q, tau_m)
        assert np.abs(diff.d_tau_dq - fd).max() < 1e-5 * max(1.0, np.abs(tau_m).max())


def test_derivative_is_symmetric(ankle_params, rng):
    # tau_s is the gradient of the potential q_m(q_s) . tau_m, so its
    # configuration derivative is a Hessian and must be symmetric
    for q in sample_configurations(ankle_params, 40, rng):
        tau_m = rng.uniform(-4.0, 4.0, 2)
        d = torque_jacobian(ankle_params, q, tau_m).d_tau_dq
        assert np.abs(d - d.T).max() < 1e-10


def test_linearity_in_motor_torque(ankle_params):
    q = np.array([0.05, 0.1])
    t1 = np.array([1.0, 0.0])
    t2 = np.array([0.0, 1.0])
    d1 = torque_jacobian(ankle_params, q, t1).d_tau_dq
    d2 = torque_jacobian(ankle_params, q, t2).d_tau_dq
    both = torque_jacobian(ankle_params, q, 2.0 * t1 + 0.5 * t2).d_tau_dq
    assert np.abs(both - (2.0 * d1 + 0.5 * d2)).max() < 1e-12


def test_per_motor_contributions_sum(ankle_params):
    q = np.array([-0.1, 0.2])
    tau_m = np.array([1.5, -0.7])
    diff = torque_jacobian(ankle_params, q, tau_m)
    total = np.einsum("i,ijk->jk", tau_m, diff.per_motor)
    assert np.abs(diff.d_tau_dq - total).max() < 1e-14


def test_input_derivative_is_jacobian_transpose(ankle_params):
    q = np.array([0.1, -0.25])
    diff = torque_jacobian(ankle_params, q, np.array([0.3, 0.4]))
    ja = np.asarray(actuation_jacobian(ankle_params, q))
    assert np.abs(diff.d_tau_du - ja.T).max() == 0.0


def test_hessians_match_second_differences(ankle_params):
    from closedchain import eval_f2

    q = np.array([0.0, 0.15])
    hess = map_hessians(ankle_params, q)
    fd = oracles.second_difference(
        lambda x: eval_f2(ankle_params, x).q_m, q
    )
    assert np.abs(hess - fd).max() < 1e-4
