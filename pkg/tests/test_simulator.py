import math

import numpy as np
import pytest

from closedchain.simulator import (
    PlantModel,
    RateConfig,
    ReferenceWaveform,
    SimTrace,
    read_trace_csv,
    simulate,
)


def _plant(n=1):
    return PlantModel(
        inertia=np.full(n, 0.0045),
        damping=np.full(n, 0.01),
        gravity_amplitude=np.zeros(n),
    )


def _sine():
    return ReferenceWaveform(kind="sine", offset=1.1, amplitude=0.6, frequency=1.0)


def test_rate_config_validation():
    with pytest.raises(ValueError):
        RateConfig(policy_hz=30, gains_hz=100, motor_hz=1000, physics_hz=10000)
    with pytest.raises(ValueError):
        RateConfig(policy_hz=200, gains_hz=100, motor_hz=1000, physics_hz=10000)
    with pytest.raises(ValueError):
        RateConfig(policy_hz=25, gains_hz=100, motor_hz=999, physics_hz=10000)
    rc = RateConfig()
    assert rc.dt == 1e-4
    assert rc.steps_per(rc.policy_hz) == 400


def test_plant_validation():
    with pytest.raises(ValueError):
        PlantModel(inertia=[0.0], damping=[0.1], gravity_amplitude=[0.0])
    with pytest.raises(ValueError):
        PlantModel(inertia=[0.1], damping=[-0.1], gravity_amplitude=[0.0])


def test_waveform_validation():
    with pytest.raises(ValueError):
        ReferenceWaveform(kind="sawtooth")


def test_equilibrium_run_is_exact(knee_params):
    # start at the constant reference with zero gravity: nothing moves
    ref = ReferenceWaveform(kind="constant", offset=1.2)
    res = simulate(knee_params, _plant(), 60.0, 1.2, ref,
                   scenario="serial_pd", duration=0.1)
    assert res.fault is None
    assert np.abs(res.tracking_error()).max() == 0.0
    assert np.abs(res.trace.q_s_dot).max() == 0.0


def test_step_reference_settles(knee_params):
    ref = ReferenceWaveform(kind="step", offset=1.0, amplitude=0.3,
                            step_time=0.05)
    res = simulate(knee_params, _plant(), 60.0, 1.2, ref,
                   scenario="serial_pd", duration=1.5)
    assert res.fault is None
    # after the transient the joint sits on the stepped reference
    assert abs(res.final_q_s[0] - 1.3) < 1e-3
    assert abs(res.final_q_s_dot[0]) < 1e-2


def test_policy_rate_holds_reference(knee_params):
    res = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                   scenario="serial_pd", duration=0.2)
    refs = res.trace.q_s_ref[:, 0]
    # constant within each 400-step policy window, changing across them
    for start in range(0, 2000, 400):
        win = refs[start:start + 400]
        assert np.all(win == win[0])
    assert refs[0] != refs[400]


def test_gain_rate_holds_transferred_gains(knee_params):
    res = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                   scenario="transferred_gains", duration=0.1)
    kpm = res.trace.k_pm[:, 0]
    for start in range(0, 1000, 100):
        win = kpm[start:start + 100]
        assert np.all(win == win[0])
    # after the first policy update the plant moves and gains shift
    assert kpm[0] != kpm[900]


def test_motor_rate_holds_torque(knee_params):
    res = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                   scenario="serial_pd", duration=0.05)
    tau = res.trace.tau_s[:, 0]
    for start in range(0, 500, 10):
        win = tau[start:start + 10]
        assert np.all(win == win[0])


def test_feedforward_holds_between_gain_ticks(knee_params):
    res = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                   scenario="feedforward_only", duration=0.05)
    tau = res.trace.tau_m[:, 0]
    for start in range(0, res.trace.steps - 100, 100):
        win = tau[start:start + 100]
        assert np.all(win == win[0])


def test_chirp_reference_matches_closed_form(knee_params):
    ref = ReferenceWaveform(kind="chirp", offset=1.1, amplitude=0.2,
                            frequency=0.5, end_frequency=3.0)
    duration = 0.4
    res = simulate(knee_params, _plant(), 60.0, 1.2, ref,
                   scenario="serial_pd", duration=duration)
    dt = res.rates.dt
    for row in (0, 400, 800, 1200):
        t = row * dt
        phase = 2.0 * math.pi * (0.5 * t + 0.5 * (3.0 - 0.5) * t * t / duration)
        expected = 1.1 + 0.2 * math.sin(phase)
        assert res.trace.q_s_ref[row, 0] == pytest.approx(expected, abs=1e-15)


def test_transferred_tracks_serial(knee_params):
    serial = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                      scenario="serial_pd", duration=2.0)
    transferred = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                           scenario="transferred_gains", duration=2.0)
    assert serial.fault is None and transferred.fault is None
    assert transferred.rms_error() < 1.5 * serial.rms_error()


def test_feedforward_faults_on_knee(knee_params):
    res = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                   scenario="feedforward_only", duration=2.0)
    assert res.fault is not None
    assert res.fault.reason == "infeasible"
    # the partial trace up to the fault is preserved
    assert 0 < res.trace.steps < 20000


def test_determinism(ankle_params):
    plant = PlantModel(inertia=[0.004, 0.003], damping=[0.01, 0.01],
                       gravity_amplitude=[0.0, 0.0])
    ref = ReferenceWaveform(kind="sine", offset=[-0.15, 0.0],
                            amplitude=[0.2, 0.25], frequency=0.5)
    a = simulate(ankle_params, plant, [40.0, 40.0], [0.8, 0.8], ref,
                 scenario="transferred_gains", duration=0.3)
    b = simulate(ankle_params, plant, [40.0, 40.0], [0.8, 0.8], ref,
                 scenario="transferred_gains", duration=0.3)
    assert np.array_equal(a.trace.q_s, b.trace.q_s)
    assert np.array_equal(a.trace.tau_m, b.trace.tau_m)
    assert a.summary_json() == b.summary_json()


def test_estimator_statistics_recorded(knee_params):
    res = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                   scenario="transferred_gains", duration=0.5)
    hist = res.iteration_histogram()
    assert sum(hist.values()) == res.summary()["estimator"]["solves"]
    assert res.summary()["estimator"]["solves"] == 50
    # warm-started solves are cheap
    assert max(hist) <= 5


def test_csv_roundtrip(tmp_path, knee_params):
    res = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                   scenario="transferred_gains", duration=0.02)
    path = tmp_path / "trace.csv"
    res.trace.to_csv(path)
    cols = read_trace_csv(path)
    assert np.array_equal(cols["t"], res.trace.t)
    assert np.array_equal(cols["q_s"], res.trace.q_s[:, 0])
    assert np.array_equal(cols["k_pm"], res.trace.k_pm[:, 0])
    assert np.array_equal(cols["margin"], res.trace.margin)


def test_csv_suffixes_multi_dof(tmp_path, ankle_params):
    plant = PlantModel(inertia=[0.004, 0.003], damping=[0.01, 0.01],
                       gravity_amplitude=[0.0, 0.0])
    ref = ReferenceWaveform(kind="constant", offset=[-0.15, 0.0])
    res = simulate(ankle_params, plant, [40.0, 40.0], [0.8, 0.8], ref,
                   scenario="transferred_gains", duration=0.02)
    path = tmp_path / "trace.csv"
    res.trace.to_csv(path)
    cols = read_trace_csv(path)
    assert np.array_equal(cols["q_s_1"], res.trace.q_s[:, 1])
    # gain matrices flatten row-major
    assert np.array_equal(cols["k_pm_2"], res.trace.k_pm[:, 2])


def test_column_names_match_layout(knee_params):
    res = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                   scenario="serial_pd", duration=0.01)
    names = res.trace.column_names()
    assert names[0] == "t"
    assert names[-1] == "margin"
    assert len(names) == 1 + 8 + 2 + 1


def test_summary_structure(knee_params):
    res = simulate(knee_params, _plant(), 60.0, 1.2, _sine(),
                   scenario="serial_pd", duration=0.05)
    s = res.summary()
    assert s["scenario"] == "serial_pd"
    assert s["steps"] == 500
    assert s["fault"] is None
    assert s["metrics"]["rms_error"] == pytest.approx(res.rms_error())
    assert s["final_state"]["q_s"] == list(res.final_q_s)


def test_rejects_bad_inputs(knee_params):
    with pytest.raises(ValueError):
        simulate(knee_params, _plant(), 60.0, 1.2, _sine(), scenario="magic")
    with pytest.raises(ValueError):
        simulate(knee_params, _plant(2), 60.0, 1.2, _sine())
    with pytest.raises(ValueError):
        simulate(knee_params, _plant(), -1.0, 1.2, _sine())
    with pytest.raises(ValueError):
        simulate(knee_params, _plant(), 60.0, 1.2, _sine(), duration=0.0)


def test_initial_state_override(knee_params):
    res = simulate(knee_params, _plant(), 60.0, 1.2,
                   ReferenceWaveform(kind="constant", offset=1.2),
                   scenario="serial_pd", duration=0.01, q_s0=[0.9])
    assert res.trace.q_s[0, 0] == 0.9
