"""Two-sided ankle transmission: two motors driving a universal joint.

The foot rotates about a pitch axis first and a roll axis second, both
through the joint centre. Each side connects a motor crank to a fixed
attachment point on the foot through a rigid rod; projecting that chain
onto the plane normal to the motor axis recovers the planar crank geometry
with an out-of-plane offset that shortens the effective rod.

Motor frames are built at construction: the third axis is the motor axis,
the first the unit projection of the line from the motor origin to the
joint centre, the second completes a right-handed set. A mirrored pair
should use motor axes pointing the same world direction so symmetric
configurations read symmetric coordinates.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as k
from .fourbar import FourBarEval, _eval_from_side_data, raise_for_status


class Side(enum.IntEnum):
    ALPHA = 0
    BETA = 1


@dataclass(frozen=True)
class AnkleSideParams:
    """One crank-rod chain of the ankle, world coordinates in metres.

    ``foot_point`` is the rod attachment on the foot at the neutral pose,
    ``motor_origin`` the crank pivot, ``motor_axis`` the crank rotation
    axis (unit). ``motor_bounds`` limit the crank angle in radians.
    """

    foot_point: tuple[float, float, float]
    motor_origin: tuple[float, float, float]
    motor_axis: tuple[float, float, float]
    crank: float
    rod: float
    motor_bounds: tuple[float, float] = (-np.pi, 2.0 * np.pi)

    def __post_init__(self):
        if not self.crank > 0.0 or not self.rod > 0.0:
            raise ValueError("crank and rod must be positive")
        if not np.isclose(np.linalg.norm(self.motor_axis), 1.0, atol=1e-9):
            raise ValueError("motor_axis must be a unit vector")
        lo, hi = self.motor_bounds
        if not lo < hi:
            raise ValueError("motor_bounds must be ordered")


@dataclass(frozen=True)
class AnkleParams:
    """Full two-sided ankle geometry.

    ``pitch_axis`` and ``roll_axis`` are unit vectors through
    ``joint_center``; the foot rotation is pitch first, then roll about the
    pitched axis. ``serial_range`` is the operating box (pitch, roll) in
    radians.
    """

    joint_center: tuple[float, float, float]
    pitch_axis: tuple[float, float, float]
    roll_axis: tuple[float, float, float]
    alpha: AnkleSideParams
    beta: AnkleSideParams
    serial_range: tuple[tuple[float, float], tuple[float, float]]
    _packed: np.ndarray = field(init=False, default=None, repr=False, compare=False)

    def __post_init__(self):
        e1 = np.asarray(self.pitch_axis, float)
        e2 = np.asarray(self.roll_axis, float)
        for name, axis in (("pitch_axis", e1), ("roll_axis", e2)):
            if not np.isclose(np.linalg.norm(axis), 1.0, atol=1e-9):
                raise ValueError(f"{name} must be a unit vector")
        if np.linalg.norm(np.cross(e1, e2)) < 1e-9:
            raise ValueError("pitch and roll axes must not be parallel")
        for lo, hi in self.serial_range:
            if not lo < hi:
                raise ValueError("serial_range intervals must be ordered")

        arr = np.zeros(k.ANKLE_LEN)
        arr[0] = k.KIND_ANKLE
        arr[k.A_E1 : k.A_E1 + 3] = e1
        arr[k.A_E2 : k.A_E2 + 3] = e2
        centre = np.asarray(self.joint_center, float)
        for idx, side in enumerate((self.alpha, self.beta)):
            off = k.A_SIDE + idx * k.SIDE_LEN
            origin = np.asarray(side.motor_origin, float)
            axis = np.asarray(side.motor_axis, float)
            toward = centre - origin
            in_plane = toward - (toward @ axis) * axis
            norm = np.linalg.norm(in_plane)
            if norm < 1e-9:
                raise ValueError(
                    "motor origin must be off the joint-centre line along the axis"
                )
            x_m = in_plane / norm
            y_m = np.cross(axis, x_m)
            arr[off + k.S_RM : off + k.S_RM + 9] = np.vstack([x_m, y_m, axis]).ravel()
            arr[off + k.S_C : off + k.S_C + 3] = centre - origin
            arr[off + k.S_PB : off + k.S_PB + 3] = np.asarray(side.foot_point, float)
            arr[off + k.S_CRANK] = side.crank
            arr[off + k.S_ROD] = side.rod
        object.__setattr__(self, "_packed", arr)

        # coarse scans: the range must contain feasible poses, and the
        # out-of-plane offset must never swallow the rod
        (lo1, hi1), (lo2, hi2) = self.serial_range
        qs = np.empty(2)
        feasible_somewhere = False
        for q1 in np.linspace(lo1, hi1, 41):
            for q2 in np.linspace(lo2, hi2, 41):
                qs[0] = q1
                qs[1] = q2
                _, _, _, sd, st = k.eval_chain(arr, qs, 0)
                if st == k.ST_OK:
                    feasible_somewhere = True
                for idx, side in enumerate((self.alpha, self.beta)):
                    if abs(sd[idx, k.SD_ZB]) >= side.rod:
                        raise ValueError(
                            f"rod of side {Side(idx).name} shorter than its "
                            f"out-of-plane offset at q_s=({q1:.3f}, {q2:.3f})"
                        )
        if not feasible_somewhere:
            raise ValueError("no feasible configuration on serial_range")

    @property
    def serial_dof(self) -> int:
        return 2

    @property
    def motor_dof(self) -> int:
        return 2

    def packed(self) -> np.ndarray:
        return self._packed

    def side(self, which: Side) -> AnkleSideParams:
        return self.alpha if which == Side.ALPHA else self.beta

    @property
    def serial_lower(self) -> np.ndarray:
        return np.array([self.serial_range[0][0], self.serial_range[1][0]])

    @property
    def serial_upper(self) -> np.ndarray:
        return np.array([self.serial_range[0][1], self.serial_range[1][1]])

    @property
    def motor_lower(self) -> np.ndarray:
        return np.array([self.alpha.motor_bounds[0], self.beta.motor_bounds[0]])

    @property
    def motor_upper(self) -> np.ndarray:
        return np.array([self.alpha.motor_bounds[1], self.beta.motor_bounds[1]])


@dataclass(frozen=True)
class AnkleEval:
    """Both crank angles with the per-side chain scalars."""

    q_m: np.ndarray
    sides: tuple[FourBarEval, FourBarEval]

    @property
    def feasible(self) -> bool:
        return self.sides[0].feasible and self.sides[1].feasible


def eval_f2(params: AnkleParams, q_s, strict: bool = True) -> AnkleEval:
    """Geometric map of the ankle: (pitch, roll) to both crank angles."""
    qs = np.asarray(q_s, float)
    qm, _, _, sd, status = k.eval_chain(params.packed(), qs, 0)
    if strict:
        raise_for_status(status, q_s=qs)
    return AnkleEval(
        q_m=qm, sides=(_eval_from_side_data(sd, 0), _eval_from_side_data(sd, 1))
    )
