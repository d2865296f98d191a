"""Angle conventions and planar frame changes.

Two angle conventions coexist in this package and are converted only here:

* headings (``theta``) are measured from the +x axis, counter-clockwise
  positive, as used by the vehicle kinematics;
* azimuths (``phi``) are bearings measured from the +y axis, so that the unit
  vector from vehicle to target is ``(sin phi, cos phi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

from .errors import DegenerateGeometry, InvalidInput

TAU = 2.0 * math.pi

Point = Tuple[float, float]


def wrap_angle(a: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi].

    Args:
        a: Angle in radians, any finite value.

    Returns:
        The representative of ``a`` modulo 2*pi in (-pi, pi].

    Raises:
        InvalidInput: if ``a`` is NaN or infinite.
    """
    a = float(a)
    if not math.isfinite(a):
        raise InvalidInput(f"cannot wrap non-finite angle {a!r}")
    r = math.remainder(a, TAU)
    if r <= -math.pi:
        r += TAU
    return r


@dataclass(frozen=True)
class Pose2D:
    """Planar pose in the global frame; ``theta`` is stored wrapped."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def position(self) -> Point:
        return (self.x, self.y)


def as_point(p: Sequence[float]) -> Point:
    if len(p) != 2:
        raise InvalidInput(f"expected a 2-D point, got {p!r}")
    return (float(p[0]), float(p[1]))


def azimuth_to(frm: Sequence[float], to: Sequence[float]) -> float:
    """Bearing from ``frm`` to ``to`` measured from the +y axis.

    The result satisfies ``to - frm == r * (sin phi, cos phi)`` for the range
    ``r``, i.e. it is the quadrant-resolved arctangent of (dx, dy).
    """
    dx = float(to[0]) - float(frm[0])
    dy = float(to[1]) - float(frm[1])
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometry("azimuth between coincident points is undefined")
    return wrap_angle(math.atan2(dx, dy))


def heading_of_azimuth(phi: float) -> float:
    """Convert an azimuth (from +y) into a heading (from +x)."""
    return wrap_angle(0.5 * math.pi - phi)


def azimuth_of_heading(theta: float) -> float:
    """Convert a heading (from +x) into an azimuth (from +y)."""
    return wrap_angle(0.5 * math.pi - theta)


def global_to_local(target: Sequence[float], pose: Pose2D) -> Point:
    """Express a global point in the vehicle frame (x forward, y to the left)."""
    dx = float(target[0]) - pose.x
    dy = float(target[1]) - pose.y
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    return (c * dx + s * dy, -s * dx + c * dy)


def local_to_global(point: Sequence[float], pose: Pose2D) -> Point:
    """Inverse of :func:`global_to_local`."""
    lx, ly = float(point[0]), float(point[1])
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    return (pose.x + c * lx - s * ly, pose.y + s * lx + c * ly)


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(float(a[0]) - float(b[0]), float(a[1]) - float(b[1]))
