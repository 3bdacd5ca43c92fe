"""Actuation Jacobian and the velocity/torque maps it induces.

The transmission is rigid, so serial and motor coordinates are two charts
on the same configuration manifold: velocities map forward through the
Jacobian, torques map backward through its transpose, and the instantaneous
power on both sides is identical.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels as k
from .ankle import AnkleParams
from .errors import Singular
from .fourbar import FourBarParams, raise_for_status

Params = Union[FourBarParams, AnkleParams]


@dataclass(frozen=True)
class TransmissionState:
    """A consistent snapshot of both coordinate charts."""

    q_s: np.ndarray
    q_s_dot: np.ndarray
    q_m: np.ndarray
    q_m_dot: np.ndarray
    jacobian: np.ndarray
    singular_margin: float


def _jacobian_eval(params: Params, q_s):
    qs = np.atleast_1d(np.asarray(q_s, float))
    qm, ja, _, sd, status = k.eval_chain(params.packed(), qs, 1)
    raise_for_status(status, q_s=qs)
    return qs, qm, ja, float(sd[:, k.SD_MARGIN].min())


def actuation_jacobian(params: Params, q_s) -> np.ndarray:
    """d(motor angles)/d(serial angles), shape (motor_dof, serial_dof)."""
    return _jacobian_eval(params, q_s)[2]


def transmission_state(params: Params, q_s, q_s_dot) -> TransmissionState:
    """Build the motor-side view of a serial state."""
    qs, qm, ja, margin = _jacobian_eval(params, q_s)
    qsd = np.atleast_1d(np.asarray(q_s_dot, float))
    return TransmissionState(
        q_s=qs,
        q_s_dot=qsd,
        q_m=qm,
        q_m_dot=ja @ qsd,
        jacobian=ja,
        singular_margin=margin,
    )


def motor_velocity(params: Params, q_s, q_s_dot) -> np.ndarray:
    return actuation_jacobian(params, q_s) @ np.atleast_1d(
        np.asarray(q_s_dot, float)
    )


def serial_torque(params: Params, q_s, tau_m) -> np.ndarray:
    """Serial joint torque produced by motor torques at this configuration."""
    return actuation_jacobian(params, q_s).T @ np.atleast_1d(
        np.asarray(tau_m, float)
    )


def serial_velocity(params: Params, q_s, q_m_dot) -> np.ndarray:
    """Invert the velocity map. Raises :class:`Singular` if the Jacobian folds."""
    qs, _, ja, _ = _jacobian_eval(params, q_s)
    out, ok = k.solve_square(ja, np.atleast_1d(np.asarray(q_m_dot, float)))
    if not ok:
        raise Singular("actuation Jacobian not invertible", q_s=qs)
    return out


def motor_torque(params: Params, q_s, tau_s) -> np.ndarray:
    """Motor torques that realise a desired serial torque."""
    qs, _, ja, _ = _jacobian_eval(params, q_s)
    out, ok = k.solve_square(
        np.ascontiguousarray(ja.T), np.atleast_1d(np.asarray(tau_s, float))
    )
    if not ok:
        raise Singular("actuation Jacobian not invertible", q_s=qs)
    return out


def singular_margin(params: Params, q_s) -> float:
    """Distance of the worst side from a transmission fold, 1 - |cos q_m2|."""
    qs = np.atleast_1d(np.asarray(q_s, float))
    _, _, _, sd, _ = k.eval_chain(params.packed(), qs, 0)
    return float(sd[:, k.SD_MARGIN].min())


def min_singular_value(params: Params, q_s) -> float:
    """Smallest singular value of the actuation Jacobian."""
    return float(k.sigma_min_square(actuation_jacobian(params, q_s)))
