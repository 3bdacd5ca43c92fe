"""Forward kinematics of the coupler attachment point, per side.

Positions are expressed in the motor frame of the requested side: origin at
the crank pivot, x axis toward the serial joint, z axis along the motor
axis. ``B_ss[j]`` holds the derivative of ``B_s`` by serial coordinate j;
the stack is symmetric in its two derivative indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .ankle import AnkleParams, Side
from .fourbar import FourBarParams


@dataclass(frozen=True)
class FkResult:
    b: np.ndarray        # (3,)
    B_s: np.ndarray      # (3, ns)
    B_ss: np.ndarray     # (ns, 3, ns)


def fk_planar(params: FourBarParams, q_s: float) -> FkResult:
    """Coupler point of the planar four-bar with first and second derivatives."""
    b, bs, bss = k._fk_side(params.packed(), 0, float(q_s), 0.0)
    return FkResult(b=b, B_s=bs, B_ss=bss)


def fk_ankle(params: AnkleParams, side: Side, q_s) -> FkResult:
    """Coupler point of one ankle side with first and second derivatives."""
    qs = np.asarray(q_s, float)
    b, bs, bss = k._fk_side(params.packed(), int(side), qs[0], qs[1])
    return FkResult(b=b, B_s=bs, B_ss=bss)
