"""Serial state recovery from motor measurements.

Only motor encoders exist on the real hardware, so the serial
configuration must be recovered by inverting the geometric map. The
inversion runs a damped Gauss-Newton on the squared angle residual,
clamped to the configured serial range. Warm starts from the previous
estimate converge in a couple of iterations during tracking; without one
the solver starts from the middle of the range.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .errors import NoConvergence, OutOfWorkspace
from .jacobian import Params, serial_velocity

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 50


@dataclass(frozen=True)
class Estimate:
    """Converged estimator output."""

    q_s: np.ndarray
    residual: float
    iterations: int


def estimate(
    params: Params,
    q_m,
    warm_start=None,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> Estimate:
    """Invert the geometric map for the serial configuration.

    Raises :class:`NoConvergence` when the iteration budget runs out and
    :class:`OutOfWorkspace` when the residual stalls at a level no
    configuration in range can explain.
    """
    target = np.atleast_1d(np.asarray(q_m, float))
    lo = params.serial_lower
    hi = params.serial_upper
    if warm_start is None:
        qs0 = 0.5 * (lo + hi)
    else:
        qs0 = np.atleast_1d(np.asarray(warm_start, float))
    qs, residual, iters, status = k.estimate_kernel(
        params.packed(), target, qs0, lo, hi, tol, max_iters
    )
    if status == 2:
        raise OutOfWorkspace(
            f"motor position {target} unreachable, residual {residual:.3e}",
            q_s=qs,
            residual=residual,
            iterations=iters,
        )
    if status == 1:
        raise NoConvergence(
            f"estimator stopped after {iters} iterations at residual "
            f"{residual:.3e}",
            q_s=qs,
            residual=residual,
            iterations=iters,
        )
    return Estimate(q_s=qs, residual=residual, iterations=iters)


def recover_velocity(params: Params, q_s, q_m_dot) -> np.ndarray:
    """Serial velocity consistent with measured motor velocity."""
    return serial_velocity(params, q_s, q_m_dot)
