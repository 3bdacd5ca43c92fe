"""Planar four-bar transmission: one motor driving one serial joint.

The mechanism lives in the plane normal to the motor axis. The motor frame
has its origin at the crank pivot M with the x axis pointing at the serial
joint O, so the base link occupies the segment from the origin to
``(base, 0)`` and the coupler attachment point traces a circle of radius
``link`` around it.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as k
from .errors import Infeasible, Singular

log = logging.getLogger(__name__)


class Verdict(enum.IntEnum):
    """Classification of a configuration against closure and motor limits."""

    FEASIBLE = 0
    MOTOR_LIMIT = 1
    INFEASIBLE = 2


def raise_for_status(status, q_s=None):
    """Translate a kernel status code into the matching exception."""
    if status == k.ST_OK:
        return
    side = status // 10
    code = status % 10
    if code == k.ST_INFEASIBLE:
        raise Infeasible(
            f"closure constraint unsatisfiable (side {side})", q_s=q_s, side=side
        )
    if code == k.ST_ROD_SHORT:
        raise Infeasible(
            f"out-of-plane offset exceeds rod length (side {side})",
            q_s=q_s,
            side=side,
        )
    if code == k.ST_AXIS_HIT:
        raise Singular(
            f"coupler point on the motor axis (side {side})", q_s=q_s, side=side
        )
    if code == k.ST_SINGULAR:
        raise Singular(
            f"transmission fold, crank and coupler aligned (side {side})",
            q_s=q_s,
            side=side,
        )
    raise RuntimeError(f"unknown kernel status {status}")


@dataclass(frozen=True)
class FourBarEval:
    """One evaluation of the projected crank chain.

    Angles in radians: ``q_m`` is the crank angle measured from the base
    direction, split into the coupler bearing ``q_m1`` and the opening
    ``q_m2`` in [0, pi]. ``r`` is cos(q_m2) after clipping, ``r_hat`` is
    sin(q_m2), and ``r*r + r_hat*r_hat == 1`` holds exactly.
    """

    q_m: float
    q_m1: float
    q_m2: float
    r: float
    r_hat: float
    coupler_distance: float
    z_offset: float
    feasible: bool
    singular_margin: float
    near_singular: bool


def _eval_from_side_data(sd, side):
    # the margin is computed from the unclipped cosine, so any failure mode
    # (closure, rod shorter than the out-of-plane offset, axis hit) drives
    # it negative and feasibility can be read off it per side
    margin = float(sd[side, k.SD_MARGIN])
    feasible = margin >= -k.EPS_FEAS
    return FourBarEval(
        q_m=float(sd[side, k.SD_QM]),
        q_m1=float(sd[side, k.SD_QM1]),
        q_m2=float(sd[side, k.SD_QM2]),
        r=float(sd[side, k.SD_R]),
        r_hat=float(sd[side, k.SD_RHAT]),
        coupler_distance=float(sd[side, k.SD_LBAR]),
        z_offset=float(sd[side, k.SD_ZB]),
        feasible=feasible,
        singular_margin=margin,
        near_singular=margin < k.NEAR_SINGULAR_MARGIN,
    )


@dataclass(frozen=True)
class FourBarParams:
    """Geometry of the planar four-bar, all lengths in metres.

    crank: motor-driven link at M. rod: coupler connecting crank tip to the
    attachment point B. link: distance from the serial joint O to B. base:
    fixed separation between M and O. ``serial_range`` bounds the operating
    interval of the serial joint; ``motor_bounds`` the admissible crank
    angles, both in radians.
    """

    crank: float
    rod: float
    link: float
    base: float
    serial_range: tuple[float, float]
    motor_bounds: tuple[float, float] = (-math.pi, 2.0 * math.pi)
    _packed: np.ndarray = field(init=False, default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("crank", "rod", "link", "base"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        lo, hi = self.serial_range
        if not lo < hi:
            raise ValueError("serial_range must be ordered")
        mlo, mhi = self.motor_bounds
        if not mlo < mhi:
            raise ValueError("motor_bounds must be ordered")
        arr = np.zeros(k.PLANAR_LEN)
        arr[0] = k.KIND_PLANAR
        arr[k.P_CRANK] = self.crank
        arr[k.P_ROD] = self.rod
        arr[k.P_LINK] = self.link
        arr[k.P_BASE] = self.base
        object.__setattr__(self, "_packed", arr)
        qs = np.empty(1)
        feasible_somewhere = False
        for q in np.linspace(lo, hi, 201):
            qs[0] = q
            _, _, _, _, st = k.eval_chain(arr, qs, 0)
            if st == k.ST_OK:
                feasible_somewhere = True
                break
        if not feasible_somewhere:
            raise ValueError("no feasible configuration on serial_range")

    @property
    def serial_dof(self) -> int:
        return 1

    @property
    def motor_dof(self) -> int:
        return 1

    def packed(self) -> np.ndarray:
        return self._packed

    @property
    def serial_lower(self) -> np.ndarray:
        return np.array([self.serial_range[0]])

    @property
    def serial_upper(self) -> np.ndarray:
        return np.array([self.serial_range[1]])

    @property
    def motor_lower(self) -> np.ndarray:
        return np.array([self.motor_bounds[0]])

    @property
    def motor_upper(self) -> np.ndarray:
        return np.array([self.motor_bounds[1]])


def eval_f(params: FourBarParams, q_s: float, strict: bool = True) -> FourBarEval:
    """Geometric map of the four-bar: serial angle to crank angle.

    With ``strict`` the call raises :class:`Infeasible` outside the closure
    set; otherwise it returns the clipped continuous extension with
    ``feasible=False``.
    """
    qs = np.array([float(q_s)])
    _, _, _, sd, status = k.eval_chain(params.packed(), qs, 0)
    if strict:
        raise_for_status(status, q_s=float(q_s))
    out = _eval_from_side_data(sd, 0)
    if out.near_singular and out.feasible:
        log.warning(
            "four-bar near transmission fold at q_s=%.6f (margin %.3e)",
            float(q_s),
            out.singular_margin,
        )
    return out


def motor_limit_map(params: FourBarParams, samples: int = 201) -> np.ndarray:
    """Verdicts over an even sampling of the serial range."""
    grid = np.linspace(params.serial_range[0], params.serial_range[1], samples)
    one = np.zeros(1)
    verdict, _, _, _, _ = k.grid_map_kernel(
        params.packed(), grid, one, params.motor_lower, params.motor_upper
    )
    return np.array([Verdict(v) for v in verdict])
