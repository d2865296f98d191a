"""Discrete-time Dubins kinematics and the radial/tangential velocity split."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DegenerateGeometry, InvalidInput
from .geometry import Pose2D, wrap_angle

# |omega*h| below which sin(x)/x is replaced by its Taylor series
_SINC_SWITCH = 1e-6


@dataclass(frozen=True)
class VehicleParams:
    """Constant forward speed ``v_c`` [m/s], sampling period ``h`` [s] and an
    optional turn-rate clamp ``omega_max`` [rad/s] (off by default)."""

    v_c: float = 4.0
    h: float = 0.25
    omega_max: Optional[float] = None

    def __post_init__(self):
        for name in ("v_c", "h"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise InvalidInput(f"{name} must be finite and > 0, got {val!r}")
        if self.omega_max is not None and not (
            math.isfinite(self.omega_max) and self.omega_max > 0
        ):
            raise InvalidInput(f"omega_max must be > 0 when set, got {self.omega_max!r}")

    @property
    def step_length(self) -> float:
        """Straight-line distance covered in one period, ``v_c * h``."""
        return self.v_c * self.h


@dataclass(frozen=True)
class VelocityDecomposition:
    """Radial (toward the target) and tangential components of ``v_c``."""

    v_r: float
    v_t: float


def chord_length(omega: float, params: VehicleParams) -> float:
    """Length ``(2 v_c / omega) sin(omega h / 2)`` of one Dubins step.

    The removable singularity at ``omega == 0`` is handled with a Taylor
    expansion of sin(x)/x.
    """
    half = 0.5 * omega * params.h
    if abs(omega * params.h) < _SINC_SWITCH:
        x2 = half * half
        sinc = 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    else:
        sinc = math.sin(half) / half
    return params.v_c * params.h * sinc


def dubins_step(state: Pose2D, omega: float, params: VehicleParams) -> Pose2D:
    """Advance the pose by one sampling period under constant ``omega``."""
    omega = float(omega)
    if not math.isfinite(omega):
        raise InvalidInput(f"omega must be finite, got {omega!r}")
    if params.omega_max is not None and abs(omega) > params.omega_max:
        raise InvalidInput(f"|omega|={abs(omega)} exceeds omega_max={params.omega_max}")
    chord = chord_length(omega, params)
    mid = state.theta + 0.5 * omega * params.h
    return Pose2D(
        state.x + chord * math.cos(mid),
        state.y + chord * math.sin(mid),
        state.theta + omega * params.h,
    )


def displacement_heading(decomp: VelocityDecomposition, phi: float) -> float:
    """Heading (from +x) of ``v_r [sin phi, cos phi] + v_t [cos phi, -sin phi]``."""
    sp, cp = math.sin(phi), math.cos(phi)
    dx = decomp.v_r * sp + decomp.v_t * cp
    dy = decomp.v_r * cp - decomp.v_t * sp
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometry("zero velocity decomposition has no direction")
    return math.atan2(dy, dx)


def _heading_change(decomp, phi, theta):
    return wrap_angle(displacement_heading(decomp, phi) - theta)


def omega_from_decomposition(
    decomp: VelocityDecomposition, phi: float, theta: float, params: VehicleParams
) -> float:
    """Angular rate that points the mid-step heading along the desired displacement.

    The required heading change is wrapped to (-pi, pi] so the vehicle never
    reverses, then scaled by ``2/h``. The result is clamped when the vehicle
    has an ``omega_max``.
    """
    omega = 2.0 / params.h * _heading_change(decomp, phi, theta)
    if params.omega_max is not None:
        omega = max(-params.omega_max, min(params.omega_max, omega))
    return omega


def tangential_sign(
    v_r: float, phi: float, theta: float, params: VehicleParams
) -> VelocityDecomposition:
    """Complete ``v_r`` with the tangential speed that needs the smaller turn.

    Both signs of ``sqrt(v_c**2 - v_r**2)`` are tried; ties go to the
    positive one.
    """
    v_c = params.v_c
    if v_r < 0 or v_r > v_c * (1.0 + 1e-12):
        raise InvalidInput(f"v_r must lie in [0, v_c={v_c}], got {v_r!r}")
    v_r = min(float(v_r), v_c)
    v_t = math.sqrt(max(v_c * v_c - v_r * v_r, 0.0))
    if v_t == 0.0:
        return VelocityDecomposition(v_r, 0.0)
    pos = VelocityDecomposition(v_r, v_t)
    neg = VelocityDecomposition(v_r, -v_t)
    turn_pos = abs(_heading_change(pos, phi, theta))
    turn_neg = abs(_heading_change(neg, phi, theta))
    if turn_neg < turn_pos - 1e-12:
        return neg
    return pos
