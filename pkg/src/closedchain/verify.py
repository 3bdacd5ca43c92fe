"""Finite-difference verification battery and grid mapping.

Every analytic quantity the package exports is re-derived here from
nothing but the forward map and numpy, then compared at seeded random
configurations. The same routines back the ``check`` CLI subcommand and
the acceptance tests, so the report a user runs in the field is the same
evidence the test suite pins.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels as k
from .estimation import estimate
from .impedance import SerialImpedance, transfer_gains
from .jacobian import Params, actuation_jacobian, transmission_state
from .torque_derivatives import torque_jacobian

# sampling stays clear of folds so FD stencils remain one-sided-safe
SAMPLE_MARGIN = 0.02

DEFAULT_TOLERANCES = {
    "jacobian": 1e-6,
    "torque_derivative": 1e-5,
    "impedance": 1e-5,
    "estimate_roundtrip": 1e-8,
}


def _eval_map(params: Params, q_s: np.ndarray) -> np.ndarray:
    qm, _, _, _, status = k.eval_chain(params.packed(), q_s, 0)
    if status != k.ST_OK:
        raise ValueError(f"infeasible sample {q_s}")
    return qm.copy()


def sample_configurations(
    params: Params,
    count: int,
    rng: np.random.Generator,
    margin: float = SAMPLE_MARGIN,
    shrink: float = 0.02,
) -> np.ndarray:
    """Draw feasible configurations with singular margin above a floor.

    Uniform in a slightly shrunken serial box, rejecting points that are
    infeasible or closer than ``margin`` to a fold.
    """
    lo = params.serial_lower
    hi = params.serial_upper
    span = hi - lo
    lo = lo + shrink * span
    hi = hi - shrink * span
    out = np.empty((count, lo.shape[0]))
    packed = params.packed()
    found = 0
    attempts = 0
    while found < count:
        attempts += 1
        if attempts > 1000 * count:
            raise RuntimeError("sampling rejection rate too high")
        q = rng.uniform(lo, hi)
        _, _, _, sd, status = k.eval_chain(packed, q, 1)
        if status != k.ST_OK:
            continue
        if sd[:, k.SD_MARGIN].min() < margin:
            continue
        out[found] = q
        found += 1
    return out


def fd_jacobian(
    func: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    h: float = 1e-6,
    order: int = 2,
) -> np.ndarray:
    """Central finite-difference Jacobian of a vector function.

    order 4 switches to the five-point stencil, needed where the map's
    higher derivatives grow toward a fold.
    """
    x = np.asarray(x, float)
    f0 = np.atleast_1d(func(x))
    jac = np.empty((f0.shape[0], x.shape[0]))
    for j in range(x.shape[0]):
        step = np.zeros_like(x)
        step[j] = h
        fp = np.atleast_1d(func(x + step))
        fm = np.atleast_1d(func(x - step))
        if order == 2:
            jac[:, j] = (fp - fm) / (2.0 * h)
        else:
            fp2 = np.atleast_1d(func(x + 2.0 * step))
            fm2 = np.atleast_1d(func(x - 2.0 * step))
            jac[:, j] = (fm2 - 8.0 * fm + 8.0 * fp - fp2) / (12.0 * h)
    return jac


@dataclass(frozen=True)
class CheckResult:
    name: str
    samples: int
    max_error: float
    tolerance: float
    seconds: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance

    def as_dict(self) -> dict:
        # plain python scalars so the dict is json-serializable
        return {
            "name": self.name,
            "samples": int(self.samples),
            "max_error": float(self.max_error),
            "tolerance": float(self.tolerance),
            "passed": bool(self.passed),
        }


def check_jacobian(
    params: Params, samples: int, rng: np.random.Generator,
    tolerance: float = DEFAULT_TOLERANCES["jacobian"],
) -> CheckResult:
    """Analytic actuation Jacobian against central differences of the map."""
    configs = sample_configurations(params, samples, rng)
    start = time.perf_counter()
    worst = 0.0
    for q in configs:
        ja = actuation_jacobian(params, q).copy()
        fd = fd_jacobian(lambda x: _eval_map(params, x), q)
        err = np.abs(ja - fd).max() / max(1.0, np.abs(ja).max())
        worst = max(worst, err)
    return CheckResult(
        "jacobian", samples, worst, tolerance, time.perf_counter() - start
    )


def check_torque_derivative(
    params: Params, samples: int, rng: np.random.Generator,
    tolerance: float = DEFAULT_TOLERANCES["torque_derivative"],
) -> CheckResult:
    """d(tau_s)/d(q_s) against differences of q_s -> J_A(q_s)^T tau_m."""
    configs = sample_configurations(params, samples, rng)
    nm = params.motor_dof
    start = time.perf_counter()
    worst = 0.0
    for q in configs:
        tau_m = rng.uniform(-2.0, 2.0, nm)

        def serial_torque_at(x):
            return actuation_jacobian(params, x).T @ tau_m

        analytic = torque_jacobian(params, q, tau_m).d_tau_dq
        fd = fd_jacobian(serial_torque_at, q, h=3e-5, order=4)
        err = np.abs(analytic - fd).max() / max(1.0, np.abs(tau_m).max())
        worst = max(worst, err)
    return CheckResult(
        "torque_derivative", samples, worst, tolerance,
        time.perf_counter() - start,
    )


def _composite_motor_torque(
    params: Params, serial: SerialImpedance, q_m: np.ndarray,
    q_m_dot: np.ndarray, q_s_hint: np.ndarray,
) -> np.ndarray:
    """Desired motor torque as a pure function of the motor state.

    The serial state is recovered by polishing the inverse map from a hint,
    so finite differences of this function probe the full pipeline the gain
    transfer linearizes.
    """
    est = estimate(params, q_m, warm_start=q_s_hint, tol=1e-13, max_iters=80)
    q_s = est.q_s
    ja = actuation_jacobian(params, q_s).copy()
    q_s_dot = np.linalg.solve(ja, q_m_dot)
    tau_s = serial.k_p * (serial.q_s_ref - q_s) - serial.k_d * q_s_dot
    return np.linalg.solve(ja.T, tau_s)


def check_impedance(
    params: Params, samples: int, rng: np.random.Generator,
    tolerance: float = DEFAULT_TOLERANCES["impedance"],
) -> CheckResult:
    """Transferred gains against differences of the composite torque map."""
    configs = sample_configurations(params, samples, rng)
    ns = params.serial_dof
    start = time.perf_counter()
    worst = 0.0
    for q in configs:
        serial = SerialImpedance(
            k_p=rng.uniform(10.0, 100.0, ns),
            k_d=rng.uniform(0.5, 5.0, ns),
            q_s_ref=q + rng.uniform(-0.1, 0.1, ns),
        )
        q_s_dot = rng.uniform(-1.0, 1.0, ns)
        state = transmission_state(params, q, q_s_dot)
        q_m = state.q_m
        q_m_dot = state.q_m_dot
        motor = transfer_gains(params, state, serial)

        h = 1e-6
        scale = max(np.abs(motor.k_pm).max(), np.abs(motor.k_dm).max(), 1.0)
        kpm_fd = -fd_jacobian(
            lambda p: _composite_motor_torque(params, serial, p, q_m_dot, q),
            q_m, h,
        )
        kdm_fd = -fd_jacobian(
            lambda v: _composite_motor_torque(params, serial, q_m, v, q),
            q_m_dot, h,
        )
        err_p = np.abs(motor.k_pm - kpm_fd).max()
        err_d = np.abs(motor.k_dm - kdm_fd).max()
        worst = max(worst, max(err_p, err_d) / scale)
    return CheckResult(
        "impedance", samples, worst, tolerance, time.perf_counter() - start
    )


def check_estimate_roundtrip(
    params: Params, samples: int, rng: np.random.Generator,
    tolerance: float = DEFAULT_TOLERANCES["estimate_roundtrip"],
) -> CheckResult:
    """Invert the map at true motor readings and compare to the source."""
    configs = sample_configurations(params, samples, rng)
    start = time.perf_counter()
    worst = 0.0
    for q in configs:
        q_m = _eval_map(params, q)
        est = estimate(params, q_m)
        worst = max(worst, float(np.abs(est.q_s - q).max()))
    return CheckResult(
        "estimate_roundtrip", samples, worst, tolerance,
        time.perf_counter() - start,
    )


_CHECKS = {
    "jacobian": check_jacobian,
    "torque_derivative": check_torque_derivative,
    "impedance": check_impedance,
    "estimate_roundtrip": check_estimate_roundtrip,
}


def run_checks(
    params: Params,
    samples: int = 100,
    seed: int = 0,
    tolerance_override: Optional[float] = None,
) -> list[CheckResult]:
    """Run the full battery with one seeded generator shared in order.

    ``tolerance_override`` replaces every per-check tolerance; the errors
    themselves are unaffected, which makes the harness easy to sanity-check
    by tightening until checks fail.
    """
    rng = np.random.default_rng(seed)
    results = []
    for name, func in _CHECKS.items():
        tol = (
            tolerance_override
            if tolerance_override is not None
            else DEFAULT_TOLERANCES[name]
        )
        results.append(func(params, samples, rng, tolerance=tol))
    return results


@dataclass(frozen=True)
class GridMap:
    """Feasibility and transmission-ratio map over the serial range."""

    grid1: np.ndarray
    grid2: np.ndarray
    verdict: np.ndarray
    q_m: np.ndarray
    jacobian: np.ndarray
    inverse: np.ndarray
    margin: np.ndarray


def grid_scan(params: Params, resolution: int) -> GridMap:
    """Evaluate verdicts and ratios on a regular grid, row-major."""
    if resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    lo = params.serial_lower
    hi = params.serial_upper
    grid1 = np.linspace(lo[0], hi[0], resolution)
    grid2 = (
        np.linspace(lo[1], hi[1], resolution)
        if lo.shape[0] == 2
        else np.zeros(1)
    )
    verdict, qm, ja, jai, margin = k.grid_map_kernel(
        params.packed(), grid1, grid2, params.motor_lower, params.motor_upper
    )
    return GridMap(
        grid1=grid1, grid2=grid2, verdict=verdict, q_m=qm, jacobian=ja,
        inverse=jai, margin=margin,
    )
