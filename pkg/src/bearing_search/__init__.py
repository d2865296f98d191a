"""Bearing-only target search with a Dubins vehicle.

A recursive pseudo-linear least-squares estimator feeds a one-step
bi-objective speed optimiser whose closed-form solution is turned into an
angular-rate command.
"""

from .controller import BetaSchedule, ControllerConfig, Mode
from .errors import (
    BearingSearchError,
    ControllerFault,
    DegenerateGeometry,
    IllConditionedInit,
    InvalidInput,
    NearTerminalRange,
)
from .estimation import TargetEstimate, TransitionMode
from .geometry import Pose2D, azimuth_to, wrap_angle
from .optimizer import OptimizerInstance, RadialCase, RadialSolution, solve
from .sensing import BearingMeasurement, Frame, NoiseModel
from .simulator import Scenario, SimulationTrace, run, sweep_beta
from .vehicle import VehicleParams, dubins_step

__version__ = "0.1.0"

__all__ = [
    "BearingMeasurement",
    "BearingSearchError",
    "BetaSchedule",
    "ControllerConfig",
    "ControllerFault",
    "DegenerateGeometry",
    "Frame",
    "IllConditionedInit",
    "InvalidInput",
    "Mode",
    "NearTerminalRange",
    "NoiseModel",
    "OptimizerInstance",
    "Pose2D",
    "RadialCase",
    "RadialSolution",
    "Scenario",
    "SimulationTrace",
    "TargetEstimate",
    "TransitionMode",
    "VehicleParams",
    "azimuth_to",
    "dubins_step",
    "run",
    "solve",
    "sweep_beta",
    "wrap_angle",
]
