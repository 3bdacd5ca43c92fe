"""Multi-rate closed-loop simulator on a rigid-transmission plant.

The plant integrates the serial joints only; motor positions are derived
from the serial state every step because the transmission is an ideal
kinematic constraint. Four nested rates mimic the deployed stack: a policy
emitting serial setpoints, a gain-transfer stage, the motor PD servo, and
the physics integrator, each holding its outputs between ticks.

Three scenarios share this loop. ``serial_pd`` closes the loop directly in
joint space, the reference every deployment wants to match.
``transferred_gains`` runs the full pipeline: estimate the serial state
from motor angles, transfer the serial impedance, and servo in motor space
at the motor rate. ``feedforward_only`` sends the desired motor torque
computed at the gain rate and holds it, the shortcut that loses the
high-rate feedback.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as k
from .jacobian import Params

SCENARIOS = {
    "serial_pd": k.SCEN_SERIAL_PD,
    "transferred_gains": k.SCEN_TRANSFERRED,
    "feedforward_only": k.SCEN_FEEDFORWARD,
}

WAVE_KINDS = {
    "constant": k.WAVE_CONSTANT,
    "sine": k.WAVE_SINE,
    "chirp": k.WAVE_CHIRP,
    "step": k.WAVE_STEP,
}

FAULT_REASONS = {
    k.FAULT_INFEASIBLE: "infeasible",
    k.FAULT_SINGULAR: "singular",
    k.FAULT_DIVERGED: "divergence",
    k.FAULT_ESTIMATOR: "estimator",
}


@dataclass(frozen=True)
class PlantModel:
    """Decoupled second-order plant per serial DoF.

    inertia * accel = tau_s - gravity_amplitude * sin(q) - damping * qdot
    """

    inertia: np.ndarray
    damping: np.ndarray
    gravity_amplitude: np.ndarray

    def __post_init__(self):
        for name in ("inertia", "damping", "gravity_amplitude"):
            object.__setattr__(
                self, name, np.atleast_1d(np.asarray(getattr(self, name), float))
            )
        if np.any(self.inertia <= 0.0):
            raise ValueError("inertia must be positive")
        if np.any(self.damping < 0.0):
            raise ValueError("damping must be non-negative")


@dataclass(frozen=True)
class RateConfig:
    """Update rates of the four loops, in Hz.

    Rates must not decrease toward the plant and each must divide the next
    faster one so ticks align exactly with physics steps.
    """

    policy_hz: int = 25
    gains_hz: int = 100
    motor_hz: int = 1000
    physics_hz: int = 10000

    def __post_init__(self):
        chain = [
            ("policy_hz", self.policy_hz),
            ("gains_hz", self.gains_hz),
            ("motor_hz", self.motor_hz),
            ("physics_hz", self.physics_hz),
        ]
        for name, value in chain:
            if not (isinstance(value, int) and value > 0):
                raise ValueError(f"{name} must be a positive integer")
        for (slow_name, slow), (fast_name, fast) in zip(chain, chain[1:]):
            if slow > fast:
                raise ValueError(f"{slow_name} must not exceed {fast_name}")
            if fast % slow != 0:
                raise ValueError(
                    f"{slow_name}={slow} must divide {fast_name}={fast}"
                )

    @property
    def dt(self) -> float:
        return 1.0 / self.physics_hz

    def steps_per(self, hz: int) -> int:
        return self.physics_hz // hz


@dataclass(frozen=True)
class ReferenceWaveform:
    """Serial setpoint trajectory sampled at policy ticks.

    The per-DoF setpoint is offset + amplitude * shape(t) with shape one of
    constant (zero), sine, linear chirp from ``frequency`` to
    ``end_frequency`` over the run, or a unit step at ``step_time``.
    """

    kind: str = "constant"
    offset: np.ndarray = 0.0
    amplitude: np.ndarray = 0.0
    frequency: float = 0.5
    end_frequency: float = 2.0
    step_time: float = 1.0

    def __post_init__(self):
        if self.kind not in WAVE_KINDS:
            raise ValueError(f"unknown waveform kind {self.kind!r}")
        object.__setattr__(
            self, "offset", np.atleast_1d(np.asarray(self.offset, float))
        )
        object.__setattr__(
            self, "amplitude", np.atleast_1d(np.asarray(self.amplitude, float))
        )

    def initial_value(self, ns: int) -> np.ndarray:
        off = np.broadcast_to(self.offset, (ns,)).copy()
        amp = np.broadcast_to(self.amplitude, (ns,))
        w = k._waveform(
            WAVE_KINDS[self.kind], 0.0, 1.0, self.frequency, self.end_frequency,
            self.step_time,
        )
        return off + amp * w


@dataclass(frozen=True)
class FaultRecord:
    time: float
    reason: str


# trace column blocks in file order; each expands per DoF
_TRACE_FIELDS = (
    ("t", 1),
    ("q_s", "ns"),
    ("q_s_dot", "ns"),
    ("q_m", "nm"),
    ("q_m_dot", "nm"),
    ("tau_s", "ns"),
    ("tau_m", "nm"),
    ("q_s_ref", "ns"),
    ("q_m_ref", "nm"),
    ("k_pm", "nm*nm"),
    ("k_dm", "nm*nm"),
    ("margin", 1),
)


@dataclass(frozen=True)
class SimTrace:
    """Uniform-timestep record of one run, one row per physics step."""

    t: np.ndarray
    q_s: np.ndarray
    q_s_dot: np.ndarray
    q_m: np.ndarray
    q_m_dot: np.ndarray
    tau_s: np.ndarray
    tau_m: np.ndarray
    q_s_ref: np.ndarray
    q_m_ref: np.ndarray
    k_pm: np.ndarray
    k_dm: np.ndarray
    margin: np.ndarray

    @property
    def steps(self) -> int:
        return self.t.shape[0]

    def column_names(self) -> list[str]:
        ns = self.q_s.shape[1]
        nm = self.q_m.shape[1]
        sizes = {"ns": ns, "nm": nm, "nm*nm": nm * nm}
        names = []
        for base, width in _TRACE_FIELDS:
            n = sizes.get(width, width)
            if n == 1:
                names.append(base)
            else:
                names.extend(f"{base}_{i}" for i in range(n))
        return names

    def to_csv(self, path) -> None:
        """Write the trace with shortest round-trip float formatting."""
        cols = [
            self.t[:, None], self.q_s, self.q_s_dot, self.q_m, self.q_m_dot,
            self.tau_s, self.tau_m, self.q_s_ref, self.q_m_ref, self.k_pm,
            self.k_dm, self.margin[:, None],
        ]
        data = np.hstack(cols)
        with open(path, "w") as fh:
            fh.write(",".join(self.column_names()) + "\n")
            for row in data:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_trace_csv(path) -> dict[str, np.ndarray]:
    """Parse a trace written by :meth:`SimTrace.to_csv` into named columns."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.array(
            [[float(v) for v in line.strip().split(",")] for line in fh]
        )
    if data.size == 0:
        data = data.reshape(0, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


@dataclass(frozen=True)
class SimResult:
    trace: SimTrace
    fault: Optional[FaultRecord]
    scenario: str
    rates: RateConfig
    duration: float
    estimator_steps: np.ndarray = field(repr=False)
    estimator_iterations: np.ndarray = field(repr=False)
    estimator_residuals: np.ndarray = field(repr=False)
    final_q_s: np.ndarray = field(repr=False)
    final_q_s_dot: np.ndarray = field(repr=False)

    def tracking_error(self) -> np.ndarray:
        return self.trace.q_s - self.trace.q_s_ref

    def rms_error(self) -> float:
        err = self.tracking_error()
        return float(np.sqrt(np.mean(np.sum(err * err, axis=1))))

    def iteration_histogram(self) -> dict[int, int]:
        used = self.estimator_iterations[self.estimator_iterations >= 0]
        values, counts = np.unique(used, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def summary(self) -> dict:
        """JSON-ready run summary with a stable key order."""
        err = self.tracking_error()
        per_dof_rms = (
            np.sqrt(np.mean(err * err, axis=0)).tolist() if err.size else []
        )
        fault = (
            None
            if self.fault is None
            else {"time": self.fault.time, "reason": self.fault.reason}
        )
        return {
            "scenario": self.scenario,
            "duration": self.duration,
            "rates": {
                "policy_hz": self.rates.policy_hz,
                "gains_hz": self.rates.gains_hz,
                "motor_hz": self.rates.motor_hz,
                "physics_hz": self.rates.physics_hz,
            },
            "steps": self.trace.steps,
            "fault": fault,
            "metrics": {
                "rms_error": self.rms_error() if err.size else None,
                "rms_error_per_dof": per_dof_rms,
                "max_abs_error": float(np.abs(err).max()) if err.size else None,
                "min_singular_margin": (
                    float(self.trace.margin.min()) if err.size else None
                ),
            },
            "estimator": {
                "solves": int((self.estimator_iterations >= 0).sum()),
                "iteration_histogram": {
                    str(key): val
                    for key, val in sorted(self.iteration_histogram().items())
                },
            },
            "final_state": {
                "q_s": self.final_q_s.tolist(),
                "q_s_dot": self.final_q_s_dot.tolist(),
            },
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2)


def simulate(
    params: Params,
    plant: PlantModel,
    k_p,
    k_d,
    reference: ReferenceWaveform,
    scenario: str = "transferred_gains",
    duration: float = 5.0,
    rates: RateConfig = RateConfig(),
    q_s0=None,
    q_s_dot0=None,
    estimator_tol: float = 1e-10,
    estimator_max_iters: int = 50,
) -> SimResult:
    """Run one closed-loop scenario and return the trace plus diagnostics.

    Faults (closure loss, folds, divergence past 10 rad, estimator
    breakdown) stop the run and are reported on the result rather than
    raised, so the partial trace stays available.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    ns = params.serial_dof
    kp = np.broadcast_to(np.asarray(k_p, float), (ns,)).copy()
    kd = np.broadcast_to(np.asarray(k_d, float), (ns,)).copy()
    if np.any(kp < 0.0) or np.any(kd < 0.0):
        raise ValueError("gains must be non-negative")
    if plant.inertia.shape[0] != ns:
        raise ValueError("plant dimension does not match the mechanism")
    offset = np.broadcast_to(reference.offset, (ns,)).copy()
    amplitude = np.broadcast_to(reference.amplitude, (ns,)).copy()

    qs0 = (
        reference.initial_value(ns)
        if q_s0 is None
        else np.atleast_1d(np.asarray(q_s0, float)).copy()
    )
    qsd0 = (
        np.zeros(ns)
        if q_s_dot0 is None
        else np.atleast_1d(np.asarray(q_s_dot0, float)).copy()
    )

    n_steps = int(round(duration * rates.physics_hz))
    if n_steps <= 0:
        raise ValueError("duration too short for one physics step")

    out = k.simulate_kernel(
        params.packed(),
        SCENARIOS[scenario],
        plant.inertia,
        plant.damping,
        plant.gravity_amplitude,
        qs0,
        qsd0,
        WAVE_KINDS[reference.kind],
        offset,
        amplitude,
        reference.frequency,
        reference.end_frequency,
        reference.step_time,
        kp,
        kd,
        n_steps,
        rates.dt,
        rates.steps_per(rates.motor_hz),
        rates.steps_per(rates.gains_hz),
        rates.steps_per(rates.policy_hz),
        params.serial_lower,
        params.serial_upper,
        estimator_tol,
        estimator_max_iters,
    )
    (
        t_tr, qs_tr, qsd_tr, qm_tr, qmd_tr, tau_s_tr, tau_m_tr, qs_ref_tr,
        qm_ref_tr, kpm_tr, kdm_tr, margin_tr, est_steps, est_iters, est_resid,
        qs_final, qsd_final, fault_code, fault_step, steps_done,
    ) = out

    n = steps_done
    trace = SimTrace(
        t=t_tr[:n],
        q_s=qs_tr[:n],
        q_s_dot=qsd_tr[:n],
        q_m=qm_tr[:n],
        q_m_dot=qmd_tr[:n],
        tau_s=tau_s_tr[:n],
        tau_m=tau_m_tr[:n],
        q_s_ref=qs_ref_tr[:n],
        q_m_ref=qm_ref_tr[:n],
        k_pm=kpm_tr[:n],
        k_dm=kdm_tr[:n],
        margin=margin_tr[:n],
    )
    fault = None
    if fault_code != k.FAULT_NONE:
        fault = FaultRecord(
            time=fault_step * rates.dt, reason=FAULT_REASONS[fault_code]
        )
    return SimResult(
        trace=trace,
        fault=fault,
        scenario=scenario,
        rates=rates,
        duration=duration,
        estimator_steps=est_steps,
        estimator_iterations=est_iters,
        estimator_residuals=est_resid,
        final_q_s=qs_final,
        final_q_s_dot=qsd_final,
    )
