"""Noisy bearing measurements in the global and vehicle frames.

Noise is counter-based: the draw for step ``k`` depends only on
``(seed, frame, k)``, so runs are reproducible regardless of evaluation order
and the two frames use disjoint streams.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateGeometry, InvalidInput
from .geometry import Pose2D, azimuth_to, wrap_angle


class Frame(str, enum.Enum):
    GLOBAL = "Global"
    LOCAL = "Local"


_FRAME_TAG = {Frame.GLOBAL: 0x676C6F62, Frame.LOCAL: 0x6C6F6361}


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian bearing noise with standard deviation ``sigma`` [rad]."""

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise InvalidInput(f"sigma must be finite and >= 0, got {self.sigma!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise InvalidInput(f"seed must be an integer, got {self.seed!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInput(f"seed must fit in 64 unsigned bits, got {self.seed!r}")


@dataclass(frozen=True)
class BearingMeasurement:
    value: float
    frame: Frame
    step: int


def noise_sample(noise: NoiseModel, k: int, frame: Frame) -> float:
    """The noise term added to the step-``k`` bearing in ``frame``."""
    if noise.sigma == 0.0:
        return 0.0
    if k < 0:
        raise InvalidInput(f"step index must be >= 0, got {k}")
    rng = np.random.default_rng([int(noise.seed), _FRAME_TAG[Frame(frame)], int(k)])
    return noise.sigma * float(rng.standard_normal())


def measure_global(
    vehicle: Pose2D, target: Sequence[float], noise: NoiseModel, k: int
) -> BearingMeasurement:
    """Azimuth from the vehicle to the target plus noise, wrapped."""
    phi = azimuth_to(vehicle.position, target)
    return BearingMeasurement(
        wrap_angle(phi + noise_sample(noise, k, Frame.GLOBAL)), Frame.GLOBAL, k
    )


def measure_local(
    target_local: Sequence[float], noise: NoiseModel, k: int
) -> BearingMeasurement:
    """Bearing of a vehicle-frame point, counter-clockwise from the heading."""
    x, y = float(target_local[0]), float(target_local[1])
    if x == 0.0 and y == 0.0:
        raise DegenerateGeometry("target coincides with the vehicle")
    phi_l = math.atan2(y, x)
    return BearingMeasurement(
        wrap_angle(phi_l + noise_sample(noise, k, Frame.LOCAL)), Frame.LOCAL, k
    )
