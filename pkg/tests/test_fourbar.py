import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from closedchain import (
    FourBarParams,
    Infeasible,
    Singular,
    Verdict,
    eval_f,
    motor_limit_map,
)

import oracles

# frozen outputs of the shipped knee geometry at its range endpoints
KNEE_QM_AT_0 = 0.5808436716893511
KNEE_QM_AT_23 = 2.605481495511582


def test_frozen_endpoint_values(knee_params):
    assert eval_f(knee_params, 0.0).q_m == pytest.approx(KNEE_QM_AT_0, abs=1e-15)
    assert eval_f(knee_params, 2.3).q_m == pytest.approx(KNEE_QM_AT_23, abs=1e-15)


def test_matches_circle_intersection_oracle(knee_params):
    for q in np.linspace(0.0, 2.3, 47):
        expected = oracles.knee_motor_angle(knee_params, q)
        assert eval_f(knee_params, q).q_m == pytest.approx(expected, abs=1e-12)


def test_right_angle_elbow_when_rod_spans_hypotenuse():
    # with rod^2 = |b|^2 + crank^2 the elbow angle is exactly pi/2
    link, base, crank = 0.05, 0.2, 0.05
    q = math.pi / 2
    bx = base + link * math.cos(q)
    by = link * math.sin(q)
    rod = math.sqrt(bx * bx + by * by + crank * crank)
    params = FourBarParams(
        crank=crank, rod=rod, link=link, base=base,
        serial_range=(0.0, 2.0),
    )
    res = eval_f(params, q)
    assert res.q_m2 == pytest.approx(math.pi / 2, abs=1e-14)
    assert res.q_m == pytest.approx(res.q_m1 + math.pi / 2, abs=1e-14)


def test_elbow_angle_stays_in_upper_branch(knee_params):
    for q in np.linspace(0.0, 2.3, 23):
        res = eval_f(knee_params, q)
        assert 0.0 <= res.q_m2 <= math.pi


def test_infeasible_raises_with_configuration():
    # reachable only where the coupler distance shrinks enough, i.e. near
    # the top of the range; q_s = 0.5 is out of reach
    params = FourBarParams(
        crank=0.05, rod=0.11, link=0.05, base=0.2,
        serial_range=(0.0, math.pi),
    )
    with pytest.raises(Infeasible) as excinfo:
        eval_f(params, 0.5)
    assert excinfo.value.q_s is not None


def test_geometry_infeasible_everywhere_rejected():
    with pytest.raises(ValueError):
        FourBarParams(crank=0.05, rod=0.06, link=0.05, base=0.4,
                      serial_range=(0.0, 1.0))


def test_singular_raises_near_fold(knee_params):
    # the transmission folds just past the configured range
    fold = 2.5781
    with pytest.raises((Singular, Infeasible)):
        eval_f(knee_params, fold)


def test_non_strict_eval_reports_instead_of_raising(knee_params):
    res = eval_f(knee_params, 2.578, strict=False)
    assert not res.feasible or res.near_singular


def test_feasible_flag_and_margin(knee_params):
    res = eval_f(knee_params, 1.0)
    assert res.feasible
    assert res.singular_margin > 0.1
    assert not res.near_singular


@settings(max_examples=60, deadline=None)
@given(q=st.floats(min_value=0.2, max_value=2.9))
def test_parallelogram_map_is_identity(q):
    params = FourBarParams(
        crank=0.05, rod=0.2, link=0.05, base=0.2,
        serial_range=(0.2, 2.9), motor_bounds=(0.0, 3.1),
    )
    assert eval_f(params, q).q_m == pytest.approx(q, abs=1e-10)


def test_motor_limit_map_verdicts(knee_params):
    verdicts = motor_limit_map(knee_params, samples=201)
    assert verdicts.shape == (201,)
    # the shipped knee stays feasible and inside bounds across its range
    assert np.all(verdicts == Verdict.FEASIBLE)


def test_motor_limit_map_flags_violations():
    params = FourBarParams(
        crank=0.05, rod=0.21, link=0.05, base=0.2,
        serial_range=(0.0, 2.3), motor_bounds=(0.7, 3.0),
    )
    verdicts = motor_limit_map(params, samples=101)
    # low end of the range maps below the 0.7 rad motor stop
    assert verdicts[0] == Verdict.MOTOR_LIMIT
    assert verdicts[-1] == Verdict.FEASIBLE


def test_rejects_bad_geometry():
    with pytest.raises(ValueError):
        FourBarParams(crank=-0.05, rod=0.21, link=0.05, base=0.2,
                      serial_range=(0.0, 1.0))
    with pytest.raises(ValueError):
        FourBarParams(crank=0.05, rod=0.21, link=0.05, base=0.2,
                      serial_range=(1.0, 0.0))
