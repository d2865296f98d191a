"""Recursive pseudo-linear least-squares estimation of a static target.

The bearing residual ``m - phi`` is replaced by its sine, which after dropping
the ``1/r`` factor is linear in the target position::

    H' p_T = H' p(k),    H = [-cos m, sin m]'

(``m`` measured from the +y axis). The global estimator runs the standard
recursive least-squares update over these pseudo-measurements. The vehicle
frame estimator carries the estimate through the frame change between steps
and observes the same pseudo-measurement with the vehicle at the origin.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import DegenerateGeometry, IllConditionedInit, InvalidInput
from .geometry import Pose2D, azimuth_to, wrap_angle
from .sensing import BearingMeasurement, Frame
from .vehicle import VehicleParams, chord_length

# |sin(m0 - m1)| below which two bearing lines count as parallel
PARALLEL_TOL = 1e-6


class TransitionMode(str, enum.Enum):
    EXACT_ROTATION = "ExactRotation"
    # config spelling of the first-order variant
    FIRST_ORDER = "PaperLiteral"


@dataclass(frozen=True, eq=False)
class TargetEstimate:
    """Target estimate ``p_hat`` with its least-squares state ``Q`` at step ``k``.

    ``frame`` says whether ``p_hat`` is a global point or a vehicle-frame point.
    """

    p_hat: np.ndarray
    Q: np.ndarray
    k: int
    frame: Frame = Frame.GLOBAL


@dataclass(frozen=True, eq=False)
class LocalTransition:
    """Affine map ``p -> A p + b`` taking a vehicle-frame point from step k-1 to k."""

    A: np.ndarray
    b: np.ndarray

    def apply(self, p) -> np.ndarray:
        return self.A @ np.asarray(p, dtype=float) + self.b


def pseudo_measurement_row(azimuth: float) -> np.ndarray:
    """``H = [-cos m, sin m]'``; annihilates the direction ``(sin m, cos m)``."""
    return np.array([-math.cos(azimuth), math.sin(azimuth)])


def local_bearing_to_azimuth(m_l: float) -> float:
    """Vehicle-frame bearing (CCW from heading) -> azimuth from the local y axis."""
    return wrap_angle(0.5 * math.pi - m_l)


def intersect_bearing_lines(
    p0: Sequence[float], m0: float, p1: Sequence[float], m1: float
) -> np.ndarray:
    """Solve ``H_i' q = H_i' p_i`` (i = 0, 1) for the crossing of two bearing lines.

    Raises:
        IllConditionedInit: if ``|sin(m0 - m1)| <= PARALLEL_TOL``.
    """
    det = math.sin(m0 - m1)
    if abs(det) <= PARALLEL_TOL:
        raise IllConditionedInit(
            f"bearing lines are (nearly) parallel: |sin(m0 - m1)| = {abs(det):.3g}"
        )
    H = np.vstack([pseudo_measurement_row(m0), pseudo_measurement_row(m1)])
    rhs = np.array([H[0] @ np.asarray(p0, float), H[1] @ np.asarray(p1, float)])
    return np.linalg.solve(H, rhs)


def _reject_zero_range(q, points):
    scale = 1.0 + max(float(np.max(np.abs(q))), *(max(abs(a), abs(b)) for a, b in points))
    for p in points:
        if math.hypot(q[0] - p[0], q[1] - p[1]) <= 1e-9 * scale:
            raise IllConditionedInit(
                "bearing lines cross at a vehicle position (zero range)"
            )


def init_global(
    m0: BearingMeasurement,
    p0: Sequence[float],
    m1: BearingMeasurement,
    p1: Sequence[float],
) -> TargetEstimate:
    """Two-bearing initialisation of the global estimator at step 1 (``Q = I``)."""
    q = intersect_bearing_lines(p0, m0.value, p1, m1.value)
    _reject_zero_range(q, [tuple(map(float, p0)), tuple(map(float, p1))])
    return TargetEstimate(q, np.eye(2), 1, Frame.GLOBAL)


def _gain(Q: np.ndarray, H: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    QH = Q @ H
    denom = float(H @ QH) + 1.0
    K = QH / denom
    # Q - Q H H' Q / (H' Q H + 1), written so that it stays symmetric
    Q_new = Q - np.outer(QH, QH) / denom
    return K, 0.5 * (Q_new + Q_new.T)


def update_global(
    est: TargetEstimate, m: BearingMeasurement, p: Sequence[float]
) -> TargetEstimate:
    """One recursive least-squares step with the global bearing ``m`` taken at ``p``."""
    H = pseudo_measurement_row(m.value)
    K, Q = _gain(est.Q, H)
    e_T = float(H @ np.asarray(p, dtype=float))
    p_hat = est.p_hat + K * (e_T - float(H @ est.p_hat))
    return TargetEstimate(p_hat, Q, est.k + 1, Frame.GLOBAL)


def local_transition(
    omega_prev: float, params: VehicleParams, mode: TransitionMode
) -> LocalTransition:
    """Frame change of a fixed point over one Dubins step with rate ``omega_prev``.

    ``ExactRotation`` is exact for the discrete kinematics: a rotation by
    ``-omega h`` and the chord translation seen from the new frame.
    ``FIRST_ORDER`` is the linearised form ``A = [[1, w], [-w, 1]]``,
    ``b = [-v_c h, 0]``.
    """
    mode = TransitionMode(mode)
    if mode is TransitionMode.FIRST_ORDER:
        w = float(omega_prev)
        return LocalTransition(
            np.array([[1.0, w], [-w, 1.0]]), np.array([-params.v_c * params.h, 0.0])
        )
    ang = omega_prev * params.h
    c, s = math.cos(ang), math.sin(ang)
    chord = chord_length(omega_prev, params)
    half = 0.5 * ang
    return LocalTransition(
        np.array([[c, s], [-s, c]]),
        np.array([-chord * math.cos(half), chord * math.sin(half)]),
    )


def init_local(
    m0: BearingMeasurement,
    m1: BearingMeasurement,
    omega0: float,
    params: VehicleParams,
    mode: TransitionMode = TransitionMode.EXACT_ROTATION,
) -> TargetEstimate:
    """Two-bearing initialisation in the step-1 vehicle frame.

    The step-0 bearing line is carried into the step-1 frame with the known
    motion ``omega0``; the step-1 line passes through the origin.
    """
    tr = local_transition(omega0, params, mode)
    origin0 = tr.b
    u0 = tr.A @ np.array([math.cos(m0.value), math.sin(m0.value)])
    if not np.any(u0):
        raise IllConditionedInit("degenerate step-0 bearing direction")
    az0 = math.atan2(u0[0], u0[1])
    az1 = local_bearing_to_azimuth(m1.value)
    q = intersect_bearing_lines(origin0, az0, (0.0, 0.0), az1)
    _reject_zero_range(q, [tuple(origin0), (0.0, 0.0)])
    return TargetEstimate(q, np.eye(2), 1, Frame.LOCAL)


def predict_local(
    est: TargetEstimate, omega_prev: float, params: VehicleParams, mode=TransitionMode.EXACT_ROTATION
) -> TargetEstimate:
    """Carry a vehicle-frame estimate through one step without a measurement."""
    tr = local_transition(omega_prev, params, mode)
    Q = est.Q
    if TransitionMode(mode) is TransitionMode.EXACT_ROTATION:
        Q = tr.A @ Q @ tr.A.T
    return TargetEstimate(tr.apply(est.p_hat), 0.5 * (Q + Q.T), est.k + 1, Frame.LOCAL)


def update_local(
    est: TargetEstimate,
    m_l: BearingMeasurement,
    omega_prev: float,
    params: VehicleParams,
    mode: TransitionMode = TransitionMode.EXACT_ROTATION,
) -> TargetEstimate:
    """One step of the vehicle-frame estimator.

    ExactRotation: predict through the exact frame change (rotating ``Q``
    with it), then correct with the pseudo-measurement ``H' p = 0``.
    First-order: ``p <- (A - K H') p + b`` with the first-order ``A`` and the
    gain computed from the unpropagated ``Q``.
    """
    mode = TransitionMode(mode)
    H = pseudo_measurement_row(local_bearing_to_azimuth(m_l.value))
    if mode is TransitionMode.FIRST_ORDER:
        tr = local_transition(omega_prev, params, mode)
        K, Q = _gain(est.Q, H)
        p_hat = (tr.A - np.outer(K, H)) @ est.p_hat + tr.b
        return TargetEstimate(p_hat, Q, est.k + 1, Frame.LOCAL)
    pred = predict_local(est, omega_prev, params, mode)
    K, Q = _gain(pred.Q, H)
    p_hat = pred.p_hat - K * float(H @ pred.p_hat)
    return TargetEstimate(p_hat, Q, est.k + 1, Frame.LOCAL)


def estimate_range_and_bearing(
    est: TargetEstimate, pose: Pose2D, frame: Frame = None
) -> Tuple[float, float]:
    """Range and azimuth from the vehicle to the estimated target.

    In the vehicle frame only ``pose.theta`` is read (compass heading).

    Raises:
        DegenerateGeometry: if the estimated range is zero.
    """
    frame = Frame(frame) if frame is not None else est.frame
    if frame is Frame.GLOBAL:
        p = pose.position
        r_hat = math.hypot(est.p_hat[0] - p[0], est.p_hat[1] - p[1])
        if r_hat == 0.0:
            raise DegenerateGeometry("estimate coincides with the vehicle")
        return r_hat, azimuth_to(p, est.p_hat)
    xl, yl = float(est.p_hat[0]), float(est.p_hat[1])
    r_hat = math.hypot(xl, yl)
    if r_hat == 0.0:
        raise DegenerateGeometry("estimate coincides with the vehicle")
    return r_hat, wrap_angle(0.5 * math.pi - pose.theta - math.atan2(yl, xl))


def batch_solution(
    prior: Sequence[float], rows: Sequence[np.ndarray], values: Sequence[float]
) -> np.ndarray:
    """Minimiser of ``|q - prior|^2/2 + sum_i (H_i' q - e_i)^2 / 2`` by normal equations.

    Independent of the recursive path; used to cross-check it.
    """
    if len(rows) != len(values):
        raise InvalidInput("rows and values must have equal length")
    A = np.eye(2)
    rhs = np.asarray(prior, dtype=float).copy()
    for H, e in zip(rows, values):
        H = np.asarray(H, dtype=float)
        A += np.outer(H, H)
        rhs += H * float(e)
    return np.linalg.solve(A, rhs)
