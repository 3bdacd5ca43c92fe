"""Analytic models of closed-kinematic-chain transmissions.

Forward geometric maps, actuation Jacobians, configuration derivatives of
the torque map, serial-to-motor impedance transfer, inverse-map state
estimation, and a multi-rate closed-loop simulator, for planar four-bar
knees and two-sided universal-joint ankles.
"""
from .ankle import AnkleEval, AnkleParams, AnkleSideParams, Side, eval_f2
from .backend import NUMBA_ENABLED, backend_name
from .errors import (
    ConfigError,
    Infeasible,
    NoConvergence,
    OutOfWorkspace,
    Singular,
    TransmissionError,
)
from .estimation import Estimate, estimate, recover_velocity
from .fourbar import FourBarEval, FourBarParams, Verdict, eval_f, motor_limit_map
from .geometry import FkResult, fk_ankle, fk_planar
from .impedance import MotorImpedance, SerialImpedance, motor_pd, transfer_gains
from .jacobian import (
    TransmissionState,
    actuation_jacobian,
    min_singular_value,
    motor_torque,
    motor_velocity,
    serial_torque,
    serial_velocity,
    singular_margin,
    transmission_state,
)
from .simulator import (
    FaultRecord,
    PlantModel,
    RateConfig,
    ReferenceWaveform,
    SimResult,
    SimTrace,
    simulate,
)
from .torque_derivatives import TorqueDifferential, map_hessians, torque_jacobian
from .verify import CheckResult, grid_scan, run_checks

__version__ = "0.1.0"

__all__ = [
    "AnkleEval",
    "AnkleParams",
    "AnkleSideParams",
    "CheckResult",
    "ConfigError",
    "Estimate",
    "FaultRecord",
    "FkResult",
    "FourBarEval",
    "FourBarParams",
    "Infeasible",
    "MotorImpedance",
    "NoConvergence",
    "NUMBA_ENABLED",
    "OutOfWorkspace",
    "PlantModel",
    "RateConfig",
    "ReferenceWaveform",
    "SerialImpedance",
    "Side",
    "SimResult",
    "SimTrace",
    "Singular",
    "TorqueDifferential",
    "TransmissionError",
    "TransmissionState",
    "Verdict",
    "actuation_jacobian",
    "backend_name",
    "estimate",
    "eval_f",
    "eval_f2",
    "fk_ankle",
    "fk_planar",
    "grid_scan",
    "map_hessians",
    "min_singular_value",
    "motor_limit_map",
    "motor_pd",
    "motor_torque",
    "motor_velocity",
    "recover_velocity",
    "run_checks",
    "serial_torque",
    "serial_velocity",
    "simulate",
    "singular_margin",
    "torque_jacobian",
    "transfer_gains",
    "transmission_state",
]
