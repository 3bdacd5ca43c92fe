"""Impedance transfer from serial joint space to motor space.

A high-level controller specifies a diagonal PD impedance on the serial
joints. The motors run their own PD loop in motor coordinates at a much
higher rate, so the serial gains must be re-expressed there. The correct
motor stiffness is the negative derivative of the desired motor torque as
a function of the measured motor state; besides the congruence transform
of the serial gains it carries two configuration-dependent corrections,
one from the torque-map curvature and one from the velocity-map curvature.
Dropping the corrections and keeping the congruence term alone is the
commonly used constant-ratio shortcut, available here as the ``b_pm``
field for comparison.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .fourbar import raise_for_status
from .jacobian import Params, TransmissionState

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SerialImpedance:
    """Diagonal PD behaviour requested on the serial joints."""

    k_p: np.ndarray
    k_d: np.ndarray
    q_s_ref: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k_p", np.atleast_1d(np.asarray(self.k_p, float)))
        object.__setattr__(self, "k_d", np.atleast_1d(np.asarray(self.k_d, float)))
        object.__setattr__(
            self, "q_s_ref", np.atleast_1d(np.asarray(self.q_s_ref, float))
        )
        if np.any(self.k_p < 0.0) or np.any(self.k_d < 0.0):
            raise ValueError("gains must be non-negative")


@dataclass(frozen=True)
class MotorImpedance:
    """Motor-space PD equivalent of a serial impedance at one state.

    ``k_pm`` splits into ``a_pm`` (torque curvature) + ``b_pm`` (gain
    congruence) + ``c_pm`` (velocity-map curvature); ``k_dm`` is exactly the
    damping congruence. ``q_m_ref`` is chosen so the motor PD reproduces
    ``tau_m_ref`` at the expansion state. When ``k_pm`` is not invertible no
    setpoint exists; the impedance then degenerates to the feedforward
    torque alone and ``degenerate`` is set.
    """

    k_pm: np.ndarray
    k_dm: np.ndarray
    q_m_ref: np.ndarray
    tau_m_ref: np.ndarray
    a_pm: np.ndarray
    b_pm: np.ndarray
    c_pm: np.ndarray
    degenerate: bool

    @property
    def c_dm(self) -> np.ndarray:
        """Velocity-dependent damping term; equals ``k_dm`` identically."""
        return self.k_dm


def transfer_gains(
    params: Params, state: TransmissionState, serial: SerialImpedance
) -> MotorImpedance:
    """Map a serial PD impedance to the equivalent motor PD at ``state``."""
    k_pm, k_dm, qm_ref, tau_m, a_pm, b_pm, c_pm, degen, status = k.transfer_kernel(
        params.packed(),
        state.q_s,
        state.q_s_dot,
        state.q_m,
        state.q_m_dot,
        serial.q_s_ref,
        serial.k_p,
        serial.k_d,
    )
    raise_for_status(status, q_s=state.q_s)
    if degen:
        log.warning(
            "motor stiffness not invertible at q_s=%s, falling back to "
            "feedforward torque only",
            np.array2string(state.q_s, precision=6),
        )
        zero = np.zeros_like(k_pm)
        return MotorImpedance(
            k_pm=zero,
            k_dm=zero.copy(),
            q_m_ref=state.q_m.copy(),
            tau_m_ref=tau_m,
            a_pm=a_pm,
            b_pm=b_pm,
            c_pm=c_pm,
            degenerate=True,
        )
    return MotorImpedance(
        k_pm=k_pm,
        k_dm=k_dm,
        q_m_ref=qm_ref,
        tau_m_ref=tau_m,
        a_pm=a_pm,
        b_pm=b_pm,
        c_pm=c_pm,
        degenerate=False,
    )


def motor_pd(impedance: MotorImpedance, q_m, q_m_dot) -> np.ndarray:
    """Torque command of the motor-side PD loop.

    For a degenerate impedance the gains are zero and the feedforward
    torque is returned unchanged.
    """
    qm = np.atleast_1d(np.asarray(q_m, float))
    qmd = np.atleast_1d(np.asarray(q_m_dot, float))
    tau = impedance.k_pm @ (impedance.q_m_ref - qm) - impedance.k_dm @ qmd
    if impedance.degenerate:
        tau = tau + impedance.tau_m_ref
    return tau
