"""Certainty-equivalence guidance: the estimate stands in for the target.

Each tick ingests the newest bearing into the estimator, converts the
posterior into a range/bearing estimate, solves the one-step radial speed
problem with the estimated range and turns the resulting velocity split into
an angular rate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (
    BearingSearchError,
    ControllerFault,
    IllConditionedInit,
    InvalidInput,
)
from .estimation import (
    TargetEstimate,
    TransitionMode,
    estimate_range_and_bearing,
    init_global,
    init_local,
    predict_local,
    update_global,
    update_local,
)
from .geometry import Point, Pose2D, as_point, global_to_local, local_to_global
from .optimizer import (
    OptimizerInstance,
    RadialSolution,
    estimation_gain,
    solve,
)
from .sensing import BearingMeasurement, Frame, NoiseModel
from .vehicle import VehicleParams, omega_from_decomposition, tangential_sign

INVERSE_RANGE_CAP = 1e3
PROGRESS_BAND = (0.95, 1.05)
PROGRESS_FACTOR = 1.1
PROGRESS_CLAMP = (0.0, 10.0)


class Mode(str, enum.Enum):
    GLOBAL_GPS = "GlobalGPS"
    LOCAL_NO_GPS = "LocalNoGPS"

    @property
    def frame(self) -> Frame:
        return Frame.GLOBAL if self is Mode.GLOBAL_GPS else Frame.LOCAL


class BetaSchedule(str, enum.Enum):
    CONSTANT = "Constant"
    INVERSE_RANGE = "InverseRange"
    PROGRESS_RATIO = "ProgressRatio"


@dataclass(frozen=True)
class ControllerConfig:
    """Static controller settings.

    ``initial_estimate`` is a global point; when given it replaces the
    two-bearing initialisation. ``pin_estimate`` skips every measurement
    correction (the estimate is only carried through frame changes), which is
    a diagnostic for isolating the control law.
    """

    mode: Mode = Mode.GLOBAL_GPS
    beta: float = 1.0
    beta_schedule: BetaSchedule = BetaSchedule.CONSTANT
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    noise: NoiseModel = field(default_factory=NoiseModel)
    initial_estimate: Optional[Point] = None
    local_transition_mode: TransitionMode = TransitionMode.EXACT_ROTATION
    omega0: float = 0.0
    pin_estimate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "beta_schedule", BetaSchedule(self.beta_schedule))
        object.__setattr__(
            self, "local_transition_mode", TransitionMode(self.local_transition_mode)
        )
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise InvalidInput(f"beta must be finite and >= 0, got {self.beta!r}")
        if not math.isfinite(self.omega0):
            raise InvalidInput(f"omega0 must be finite, got {self.omega0!r}")
        if self.initial_estimate is not None:
            object.__setattr__(self, "initial_estimate", as_point(self.initial_estimate))
        if self.pin_estimate and self.initial_estimate is None:
            raise InvalidInput("pin_estimate requires an initial_estimate")


@dataclass(frozen=True)
class ControllerState:
    """Everything the controller carries from one tick to the next."""

    k: int = 0
    m0: Optional[BearingMeasurement] = None
    p0: Optional[Point] = None
    prior_local: Optional[Tuple[float, float]] = None
    estimate: Optional[TargetEstimate] = None
    omega_prev: float = 0.0
    r_hat_first: Optional[float] = None
    beta_current: Optional[float] = None
    gain_history: Tuple[float, ...] = ()


@dataclass(frozen=True)
class ControlDecision:
    """Output of one tick. ``terminal`` marks the estimated range below one step."""

    omega: float
    v_r_star: float
    r_hat: float
    phi_hat: float
    estimate: Optional[TargetEstimate]
    solution: Optional[RadialSolution]
    beta_used: float
    terminal: bool = False
    k: int = 0


def step_zero(
    config: ControllerConfig,
    measurement: BearingMeasurement,
    pose: Optional[Pose2D] = None,
) -> Tuple[ControlDecision, ControllerState]:
    """Tick ``k = 0``: remember the first bearing and apply ``omega0``.

    ``pose`` is the start pose. Global mode keeps its position for the
    two-bearing initialisation; the vehicle-frame mode only uses it to
    express a configured prior relative to the start frame.
    """
    if measurement.frame is not config.mode.frame:
        raise ControllerFault(
            f"{measurement.frame.value} bearing fed to a {config.mode.value} controller"
        )
    p0 = None
    prior_local = None
    if config.mode is Mode.GLOBAL_GPS:
        if pose is None and config.initial_estimate is None:
            raise ControllerFault("global mode needs the start position")
        p0 = pose.position if pose is not None else None
    elif config.initial_estimate is not None:
        if pose is None:
            raise ControllerFault("a prior in vehicle-frame mode needs the start pose")
        prior_local = global_to_local(config.initial_estimate, pose)
    omega = config.omega0
    if config.vehicle.omega_max is not None:
        lim = config.vehicle.omega_max
        omega = max(-lim, min(lim, omega))
    decision = ControlDecision(
        omega=omega,
        v_r_star=math.nan,
        r_hat=math.nan,
        phi_hat=math.nan,
        estimate=None,
        solution=None,
        beta_used=config.beta,
        k=0,
    )
    state = ControllerState(
        k=1,
        m0=measurement,
        p0=p0,
        prior_local=prior_local,
        omega_prev=omega,
        beta_current=config.beta,
    )
    return decision, state


def _estimate(config, state, pose, measurement) -> TargetEstimate:
    params = config.vehicle
    tmode = config.local_transition_mode
    est = state.estimate
    if config.mode is Mode.GLOBAL_GPS:
        if est is None:
            if config.initial_estimate is not None:
                return TargetEstimate(
                    np.array(config.initial_estimate, dtype=float), np.eye(2), 1, Frame.GLOBAL
                )
            return init_global(state.m0, state.p0, measurement, pose.position)
        if config.pin_estimate:
            return replace(est, k=est.k + 1)
        return update_global(est, measurement, pose.position)
    if est is None:
        if state.prior_local is not None:
            start = TargetEstimate(np.array(state.prior_local), np.eye(2), 0, Frame.LOCAL)
            moved = predict_local(start, state.omega_prev, params, tmode)
            return replace(moved, Q=np.eye(2))
        return init_local(state.m0, measurement, state.omega_prev, params, tmode)
    if config.pin_estimate:
        return predict_local(est, state.omega_prev, params, tmode)
    return update_local(est, measurement, state.omega_prev, params, tmode)


def _next_beta(config: ControllerConfig, state: ControllerState, r_hat: float) -> float:
    sched = config.beta_schedule
    if sched is BetaSchedule.CONSTANT:
        return config.beta
    if sched is BetaSchedule.INVERSE_RANGE:
        r0 = state.r_hat_first if state.r_hat_first is not None else r_hat
        return min(config.beta * r0 / r_hat, INVERSE_RANGE_CAP)
    # ProgressRatio: compare the estimation gains of the two previous decisions
    beta = state.beta_current if state.beta_current is not None else config.beta
    hist = state.gain_history
    if len(hist) < 2:
        return beta
    prev, last = hist[-2], hist[-1]
    if prev == 0.0:
        ratio = 1.0 if last == 0.0 else math.inf
    else:
        ratio = last / prev
    lo, hi = PROGRESS_BAND
    beta = beta * PROGRESS_FACTOR if lo <= ratio <= hi else beta / PROGRESS_FACTOR
    return min(max(beta, PROGRESS_CLAMP[0]), PROGRESS_CLAMP[1])


def control_law(
    r_hat: float, phi_hat: float, theta: float, beta: float, params: VehicleParams
) -> Tuple[Optional[RadialSolution], float, float, bool]:
    """Map a range/bearing estimate to ``(solution, v_r*, omega, terminal)``.

    When the estimated range is within one step (``v_c h / r_hat >= 1``) the
    normalized problem is undefined and a terminal decision (``omega = 0``)
    is returned.
    """
    rho = params.v_c * params.h / r_hat
    if rho >= 1.0 - 1e-9:
        return None, params.v_c, 0.0, True
    sol = solve(OptimizerInstance(r_hat, params.v_c, params.h, beta))
    decomp = tangential_sign(sol.v_r_star, phi_hat, theta, params)
    omega = omega_from_decomposition(decomp, phi_hat, theta, params)
    return sol, sol.v_r_star, omega, False


def step(
    config: ControllerConfig,
    state: ControllerState,
    pose: Pose2D,
    measurement: BearingMeasurement,
) -> Tuple[ControlDecision, ControllerState]:
    """One tick ``k >= 1``.

    In vehicle-frame mode only ``pose.theta`` (the compass heading) is read.

    Raises:
        ControllerFault: wrapping any estimation or optimisation failure.
    """
    if state.k < 1:
        raise ControllerFault("step() called before step_zero()")
    if measurement.frame is not config.mode.frame:
        raise ControllerFault(
            f"{measurement.frame.value} bearing fed to a {config.mode.value} controller"
        )
    try:
        est = _estimate(config, state, pose, measurement)
        r_hat, phi_hat = estimate_range_and_bearing(est, pose, config.mode.frame)
        beta = _next_beta(config, state, r_hat)
        sol, v_r_star, omega, terminal = control_law(
            r_hat, phi_hat, pose.theta, beta, config.vehicle
        )
    except IllConditionedInit as exc:
        raise ControllerFault(
            f"step {state.k}: two-bearing initialisation failed and no prior is configured ({exc})"
        ) from exc
    except BearingSearchError as exc:
        raise ControllerFault(f"step {state.k}: {exc}") from exc

    gains = state.gain_history
    if config.beta_schedule is BetaSchedule.PROGRESS_RATIO and sol is not None:
        inst = OptimizerInstance(r_hat, config.vehicle.v_c, config.vehicle.h, beta)
        gains = (gains + (estimation_gain(inst, v_r_star),))[-2:]
    decision = ControlDecision(
        omega=omega,
        v_r_star=v_r_star,
        r_hat=r_hat,
        phi_hat=phi_hat,
        estimate=est,
        solution=sol,
        beta_used=beta,
        terminal=terminal,
        k=state.k,
    )
    new_state = replace(
        state,
        k=state.k + 1,
        estimate=est,
        omega_prev=omega,
        r_hat_first=state.r_hat_first if state.r_hat_first is not None else r_hat,
        beta_current=beta,
        gain_history=gains,
    )
    return decision, new_state


def estimate_in_global(decision: ControlDecision, pose: Pose2D) -> Optional[Point]:
    """Global-frame target estimate of a decision (metrics helper).

    Vehicle-frame estimates are mapped back with the true pose, which the
    controller itself never sees.
    """
    est = decision.estimate
    if est is None:
        return None
    if est.frame is Frame.GLOBAL:
        return (float(est.p_hat[0]), float(est.p_hat[1]))
    return local_to_global(est.p_hat, pose)
