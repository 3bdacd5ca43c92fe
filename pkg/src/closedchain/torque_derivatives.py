"""Configuration derivatives of the transmitted serial torque.

At fixed motor torque the serial torque is the gradient of the scalar
potential (motor angles dotted with motor torques), so its configuration
derivative is a symmetric matrix assembled from the per-motor Hessians of
the geometric map. The derivative with respect to the motor torque input is
the Jacobian transpose, and the derivative with respect to serial velocity
is identically zero because the map is static.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .fourbar import raise_for_status
from .jacobian import Params


@dataclass(frozen=True)
class TorqueDifferential:
    """Local model of the torque map around one configuration."""

    tau_s: np.ndarray        # (ns,) transmitted serial torque
    d_tau_dq: np.ndarray     # (ns, ns) derivative at fixed motor torque
    d_tau_du: np.ndarray     # (ns, nm) derivative in the motor torque input
    per_motor: np.ndarray    # (nm, ns, ns) unit-torque Hessian contributions


def map_hessians(params: Params, q_s) -> np.ndarray:
    """Second derivatives of each motor coordinate map, shape (nm, ns, ns)."""
    qs = np.atleast_1d(np.asarray(q_s, float))
    _, _, hess, _, status = k.eval_chain(params.packed(), qs, 2)
    raise_for_status(status, q_s=qs)
    return hess


def torque_jacobian(params: Params, q_s, tau_m) -> TorqueDifferential:
    """Differential of the serial torque produced by held motor torques."""
    qs = np.atleast_1d(np.asarray(q_s, float))
    tm = np.atleast_1d(np.asarray(tau_m, float))
    _, ja, hess, _, status = k.eval_chain(params.packed(), qs, 2)
    raise_for_status(status, q_s=qs)
    return TorqueDifferential(
        tau_s=ja.T @ tm,
        d_tau_dq=np.einsum("i,ijk->jk", tm, hess),
        d_tau_du=np.ascontiguousarray(ja.T),
        per_motor=hess,
    )
