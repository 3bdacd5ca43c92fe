import numpy as np
import pytest

from closedchain import (
    Infeasible,
    Singular,
    actuation_jacobian,
    eval_f,
    eval_f2,
    motor_torque,
    motor_velocity,
    serial_torque,
    serial_velocity,
    singular_margin,
    transmission_state,
)
from closedchain.verify import sample_configurations

import oracles


def test_knee_matches_difference_oracle(knee_params, rng):
    for q in sample_configurations(knee_params, 50, rng):
        ja = np.asarray(actuation_jacobian(knee_params, q))
        fd = oracles.central_difference(
            lambda x: np.array([eval_f(knee_params, x[0]).q_m]), q
        )
        assert np.abs(ja - fd).max() < 1e-7


def test_ankle_matches_difference_oracle(ankle_params, rng):
    for q in sample_configurations(ankle_params, 50, rng):
        ja = np.asarray(actuation_jacobian(ankle_params, q))
        fd = oracles.central_difference(
            lambda x: eval_f2(ankle_params, x).q_m, q
        )
        assert np.abs(ja - fd).max() < 1e-6 * max(1.0, np.abs(ja).max())


def test_power_balance(ankle_params, rng):
    # the transmission is lossless: motor power equals serial power for
    # any velocity under the two conjugate maps
    for q in sample_configurations(ankle_params, 25, rng):
        q_s_dot = rng.uniform(-2.0, 2.0, 2)
        tau_m = rng.uniform(-3.0, 3.0, 2)
        q_m_dot = motor_velocity(ankle_params, q, q_s_dot)
        tau_s = serial_torque(ankle_params, q, tau_m)
        assert tau_m @ q_m_dot == pytest.approx(tau_s @ q_s_dot, abs=1e-12)


def test_torque_roundtrip(ankle_params, rng):
    for q in sample_configurations(ankle_params, 25, rng):
        tau_s = rng.uniform(-5.0, 5.0, 2)
        tau_m = motor_torque(ankle_params, q, tau_s)
        back = serial_torque(ankle_params, q, tau_m)
        assert np.abs(back - tau_s).max() < 1e-12


def test_zero_torque_maps_to_zero(knee_params):
    assert serial_torque(knee_params, np.array([1.0]), np.zeros(1)) == pytest.approx(0.0)


def test_parallelogram_identity_maps(knee_par_params):
    q = np.array([1.3])
    ja = np.asarray(actuation_jacobian(knee_par_params, q))
    assert ja[0, 0] == pytest.approx(1.0, abs=1e-9)
    tau = serial_torque(knee_par_params, q, np.array([2.5]))
    assert tau[0] == pytest.approx(2.5, abs=1e-9)


def test_singular_raised_at_fold(knee_params):
    # past the fold the Jacobian has no meaning
    with pytest.raises((Singular, Infeasible)):
        actuation_jacobian(knee_params, np.array([2.578]))


def test_velocity_roundtrip(ankle_params):
    q = np.array([0.1, -0.1])
    q_s_dot = np.array([0.7, -0.4])
    q_m_dot = motor_velocity(ankle_params, q, q_s_dot)
    back = serial_velocity(ankle_params, q, q_m_dot)
    assert np.abs(back - q_s_dot).max() < 1e-12


def test_transmission_state_consistency(ankle_params):
    q = np.array([-0.2, 0.15])
    qd = np.array([0.5, 0.3])
    state = transmission_state(ankle_params, q, qd)
    ev = eval_f2(ankle_params, q)
    assert np.abs(state.q_m - ev.q_m).max() < 1e-15
    assert np.abs(
        state.q_m_dot - np.asarray(state.jacobian) @ qd
    ).max() < 1e-15
    assert state.singular_margin > 0.0


def test_transmission_ratio_diverges_toward_boundary(ankle_params):
    # near a fold the motor must turn ever farther for unit joint motion:
    # the smallest serial-per-motor gain collapses, so its reciprocal
    # (the largest singular value of the forward Jacobian) diverges
    q2s = np.linspace(0.0, 0.57, 30)
    ratio = []
    for q2 in q2s:
        ev = eval_f2(ankle_params, np.array([0.0, q2]), strict=False)
        if not ev.feasible:
            break
        margin = min(s.singular_margin for s in ev.sides)
        if margin < 1e-4:
            break
        ja = np.asarray(actuation_jacobian(ankle_params, np.array([0.0, q2])))
        ratio.append(1.0 / np.linalg.svd(np.linalg.inv(ja), compute_uv=False).min())
    tail = ratio[-10:]
    assert len(tail) == 10
    assert all(b > a for a, b in zip(tail, tail[1:]))


def test_margin_helpers_agree(knee_params):
    q = np.array([1.7])
    m = singular_margin(knee_params, q)
    ev = eval_f(knee_params, 1.7)
    assert m == pytest.approx(ev.singular_margin, abs=1e-15)
