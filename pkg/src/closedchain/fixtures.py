"""Canonical desk-scale demonstration geometries.

These are the mechanisms used throughout the test suite, the shipped
example configs and the benchmark. ``knee()`` is a generic single-joint
drive with a clearly configuration-dependent ratio, ``knee_parallelogram()``
is the degenerate constant-ratio case (the geometric map reduces to the
identity on its range), and ``ankle()`` is a mirrored two-sided unit.
The JSON files under ``configs/`` mirror these numbers.
"""
from __future__ import annotations

from .ankle import AnkleParams, AnkleSideParams
from .fourbar import FourBarParams


def knee() -> FourBarParams:
    """Single-sided knee drive.

    The range stays on the branch where the crank angle grows with the
    joint angle; the transmission folds just past 2.57 rad.
    """
    return FourBarParams(
        crank=0.05,
        rod=0.21,
        link=0.05,
        base=0.20,
        serial_range=(0.0, 2.3),
        motor_bounds=(0.0, 3.0),
    )


def knee_parallelogram() -> FourBarParams:
    """Parallelogram drive: crank equals link, rod equals base.

    The geometric map is the identity on (0, pi); the interval endpoints
    are folds, so the range keeps a little distance from both.
    """
    return FourBarParams(
        crank=0.05,
        rod=0.20,
        link=0.05,
        base=0.20,
        serial_range=(0.2, 2.9),
        motor_bounds=(0.0, 3.1),
    )


def ankle() -> AnkleParams:
    """Mirror-symmetric two-sided ankle.

    Both motor frames use the same world axis direction so mirrored
    configurations produce equal in-plane coordinates and opposite
    out-of-plane offsets.
    """
    return AnkleParams(
        joint_center=(0.0, 0.0, 0.0),
        pitch_axis=(1.0, 0.0, 0.0),
        roll_axis=(0.0, 1.0, 0.0),
        alpha=AnkleSideParams(
            foot_point=(0.04, 0.03, -0.06),
            motor_origin=(0.04, 0.09, 0.02),
            motor_axis=(1.0, 0.0, 0.0),
            crank=0.03,
            rod=0.11,
            motor_bounds=(0.0, 4.0),
        ),
        beta=AnkleSideParams(
            foot_point=(-0.04, 0.03, -0.06),
            motor_origin=(-0.04, 0.09, 0.02),
            motor_axis=(1.0, 0.0, 0.0),
            crank=0.03,
            rod=0.11,
            motor_bounds=(0.0, 4.0),
        ),
        serial_range=((-0.6, 0.3), (-0.55, 0.55)),
    )
