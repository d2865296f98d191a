"""Normalized estimation-vs-control objective and its closed-form minimiser.

One step of the guidance problem picks the radial speed ``v_r`` in
``[v_c**2 h / (2 r), v_c]``. Writing ``rho = v_c h / r`` and
``w = 1 - v_r / v_c`` the normalized objective is::

    f = 1 - w (2 - w) (1 - rho**2)**2 / ((1 - rho)**2 + 2 rho w)**2
          + beta * w (1 + rho**2) / (1 - rho)**2

The first term is the estimation deficit (0 at the stationary speed
``v_s``, 1 at ``v_c``), the second the control deficit (1 at ``v_s``, 0 at
``v_c``). All evaluations below use this ``(rho, w)`` form; it avoids the
cancellations of the dimensional expression near ``v_r = v_c`` and
``rho -> 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import InvalidInput, NearTerminalRange

RHO_TERMINAL_TOL = 1e-9
_SCAN_INTERVALS = 2048
_BISECT_TOL = 1e-12


class RadialCase(str, enum.Enum):
    A_GREEDY_BETA4 = "A_GreedyBeta4"
    B_SMALL_RHO = "B_SmallRho"
    B_LARGE_RHO = "B_LargeRho"
    C_INTERIOR = "C_Interior"
    D_ROOT_WINS = "D_RootWins"
    D_STATIONARY_WINS = "D_StationaryWins"


@dataclass(frozen=True)
class OptimizerInstance:
    """Range ``r`` [m], speed ``v_c`` [m/s], period ``h`` [s] and weight ``beta``."""

    r: float
    v_c: float
    h: float
    beta: float

    def __post_init__(self):
        for name in ("r", "v_c", "h"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise InvalidInput(f"{name} must be finite and > 0, got {val!r}")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise InvalidInput(f"beta must be finite and >= 0, got {self.beta!r}")
        if self.rho > 1.0:
            raise InvalidInput(f"rho = v_c h / r = {self.rho} exceeds 1")

    @property
    def rho(self) -> float:
        return self.v_c * self.h / self.r

    @property
    def one_minus_rho(self) -> float:
        return (self.r - self.v_c * self.h) / self.r

    @property
    def lower_bound(self) -> float:
        """Smallest feasible radial speed, ``v_c**2 h / (2 r)``."""
        return 0.5 * self.v_c * self.rho


@dataclass(frozen=True)
class RadialSolution:
    v_r_star: float
    case_fired: RadialCase
    v_s: float
    v_z: Optional[float]
    rho: float
    rho_c: Optional[float]
    f_at_star: float


def _terms(inst: OptimizerInstance):
    om = inst.one_minus_rho
    if om <= RHO_TERMINAL_TOL:
        raise NearTerminalRange(
            f"rho = {inst.rho!r} is within {RHO_TERMINAL_TOL} of 1; objective undefined"
        )
    rho = inst.rho
    return rho, om, 1.0 + rho * rho, (om * (1.0 + rho)) ** 2


def objective_f(inst: OptimizerInstance, v_r):
    """Normalized objective at radial speed ``v_r`` (scalar or array).

    Raises:
        NearTerminalRange: if ``rho`` is within 1e-9 of 1.
    """
    rho, om, s, q = _terms(inst)
    w = (inst.v_c - v_r) / inst.v_c
    xi = om * om + 2.0 * rho * w
    return 1.0 - w * (2.0 - w) * q / (xi * xi) + inst.beta * w * s / (om * om)


def objective_fprime(inst: OptimizerInstance, v_r):
    """Derivative of :func:`objective_f` with respect to ``v_r`` [1/(m/s)]."""
    rho, om, s, q = _terms(inst)
    w = (inst.v_c - v_r) / inst.v_c
    xi = om * om + 2.0 * rho * w
    return (2.0 * q * (om * om - s * w) / xi**3 - inst.beta * s / (om * om)) / inst.v_c


def objective_fsecond(inst: OptimizerInstance, v_r):
    """Second derivative of :func:`objective_f`; the control term contributes nothing."""
    rho, om, s, q = _terms(inst)
    w = (inst.v_c - v_r) / inst.v_c
    xi = om * om + 2.0 * rho * w
    return 2.0 * q * (s * xi + 6.0 * rho * (om * om - s * w)) / (xi**4 * inst.v_c**2)


def stationary_v_s(inst: OptimizerInstance) -> float:
    """Maximiser of the estimation objective, ``2 r v_c**2 h / (r**2 + v_c**2 h**2)``."""
    vh = inst.v_c * inst.h
    return 2.0 * inst.r * inst.v_c * vh / (inst.r * inst.r + vh * vh)


def rho_critical(beta: float) -> float:
    """Critical ``rho`` splitting greedy from interior solutions for ``2 <= beta <= 4``.

    Evaluated as ``(beta - 2) / (2 + sqrt(4 beta - beta**2))``, the rationalised
    form of ``(2 - sqrt(4 beta - beta**2)) / (beta - 2)``, which is exact at
    ``beta = 2`` (limit 0) and gives 1 at ``beta = 4``.
    """
    if not (2.0 <= beta <= 4.0):
        raise InvalidInput(f"rho_critical needs beta in [2, 4], got {beta!r}")
    return (beta - 2.0) / (2.0 + math.sqrt(max(4.0 * beta - beta * beta, 0.0)))


def real_cubic_roots(a: float, b: float, c: float, d: float) -> List[float]:
    """Real roots of ``a x**3 + b x**2 + c x + d``, Newton-polished.

    Falls back to the quadratic or linear formula when the leading
    coefficients vanish relative to the rest.
    """
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if scale == 0.0:
        return []
    a, b, c, d = a / scale, b / scale, c / scale, d / scale
    if abs(a) < 1e-14:
        roots = _quadratic_roots(b, c, d)
    else:
        roots = _monic_cubic_roots(b / a, c / a, d / a)

    def p(x):
        return ((a * x + b) * x + c) * x + d

    def dp(x):
        return (3.0 * a * x + 2.0 * b) * x + c

    polished = []
    for x in roots:
        for _ in range(3):
            slope = dp(x)
            if slope == 0.0:
                break
            step = p(x) / slope
            x -= step
            if abs(step) <= 1e-16 * max(1.0, abs(x)):
                break
        polished.append(x)
    return sorted(polished)


def _quadratic_roots(a, b, c):
    if abs(a) < 1e-14 * max(abs(b), abs(c), 1e-300):
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    qq = -0.5 * (b + math.copysign(sq, b))
    roots = [qq / a]
    if qq != 0.0:
        roots.append(c / qq)
    return roots


def _monic_cubic_roots(b, c, d):
    # x = t - b/3 gives t**3 + p t + q = 0
    shift = b / 3.0
    p = c - b * shift
    q = 2.0 * shift**3 - c * shift + d
    half_q = 0.5 * q
    third_p = p / 3.0
    disc = half_q * half_q + third_p**3
    if disc > 0.0:
        sq = math.sqrt(disc)
        u = -half_q - math.copysign(sq, half_q)
        u = math.copysign(abs(u) ** (1.0 / 3.0), u)
        t = u - third_p / u if u != 0.0 else 0.0
        return [t - shift]
    if third_p == 0.0:
        return [-shift]
    m = 2.0 * math.sqrt(-third_p)
    arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
    theta = math.acos(arg) / 3.0
    return [m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]


def _sign_scan_root(inst: OptimizerInstance, lo: float, hi: float) -> Optional[float]:
    """Largest sign change of the derivative on ``[lo, hi]``, bisected to 1e-12."""
    grid = np.linspace(lo, hi, _SCAN_INTERVALS + 1)
    vals = objective_fprime(inst, grid)
    for i in range(_SCAN_INTERVALS - 1, -1, -1):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fb == 0.0:
            return float(b)
        if fa == 0.0:
            return float(a)
        if (fa < 0.0) != (fb < 0.0):
            while b - a > _BISECT_TOL * max(1.0, abs(b)):
                mid = 0.5 * (a + b)
                fm = objective_fprime(inst, mid)
                if fm == 0.0:
                    return float(mid)
                if (fm < 0.0) == (fa < 0.0):
                    a, fa = mid, fm
                else:
                    b = mid
            return float(0.5 * (a + b))
    return None


def largest_root_v_z(inst: OptimizerInstance) -> Optional[float]:
    """Largest ``v`` in ``[v_s, v_c]`` where the objective's derivative vanishes.

    Clearing the positive denominator turns the derivative into a cubic in
    ``w = 1 - v/v_c``, solved in closed form; a sign scan with bisection
    backs it up. For ``beta > 0`` the derivative is strictly negative at
    ``v_s``, so no root exists when it is still non-positive at ``v_c``; the
    function then returns ``None``. For ``beta == 0`` the root is ``v_s``.
    """
    rho, om, s, q = _terms(inst)
    v_s = stationary_v_s(inst)
    if inst.beta == 0.0:
        return v_s
    v_c = inst.v_c
    C = inst.beta * s / (om * om)
    om2 = om * om
    # 2 q (om^2 - s w) - C (om^2 + 2 rho w)^3 = 0
    coeffs = (
        -8.0 * C * rho**3,
        -12.0 * C * rho * rho * om2,
        -2.0 * q * s - 6.0 * C * rho * om2 * om2,
        2.0 * q * om2 - C * om2**3,
    )
    w_s = (v_c - v_s) / v_c
    tol = 1e-9 * max(w_s, 1e-300)
    inside = [w for w in real_cubic_roots(*coeffs) if -tol <= w <= w_s + tol]
    fp_hi = objective_fprime(inst, v_c)
    if inside:
        w = min(max(min(inside), 0.0), w_s)
        v = v_c * (1.0 - w)
        return max(v_s, min(v, v_c))
    if fp_hi == 0.0:
        return v_c
    return _sign_scan_root(inst, v_s, v_c)


def solve(inst: OptimizerInstance) -> RadialSolution:
    """Optimal radial speed by the four-regime case analysis on ``beta``.

    * beta >= 4: ``v_c``.
    * 2 <= beta < 4: ``v_c`` if ``rho <= rho_c(beta)``, else ``v_z``.
    * 1 <= beta < 2: ``v_z``.
    * 0 <= beta < 1: ``v_z`` if ``f(v_z) <= beta`` (ties keep ``v_z``), else ``v_s``.
      ``v_s`` also wins when the only root is ``v_s`` itself (``beta == 0``).
    """
    _terms(inst)
    beta, rho = inst.beta, inst.rho
    v_s = stationary_v_s(inst)
    v_z = None
    rho_c = None
    if beta >= 4.0:
        case, v_star = RadialCase.A_GREEDY_BETA4, inst.v_c
    elif beta >= 2.0:
        rho_c = rho_critical(beta)
        if rho <= rho_c:
            case, v_star = RadialCase.B_SMALL_RHO, inst.v_c
        else:
            v_z = largest_root_v_z(inst)
            case, v_star = RadialCase.B_LARGE_RHO, inst.v_c if v_z is None else v_z
    elif beta >= 1.0:
        v_z = largest_root_v_z(inst)
        case, v_star = RadialCase.C_INTERIOR, inst.v_c if v_z is None else v_z
    else:
        v_z = largest_root_v_z(inst)
        if v_z is None or v_z <= v_s:
            case, v_star = RadialCase.D_STATIONARY_WINS, v_s
        elif objective_f(inst, v_z) <= beta:
            case, v_star = RadialCase.D_ROOT_WINS, v_z
        else:
            case, v_star = RadialCase.D_STATIONARY_WINS, v_s
    return RadialSolution(
        v_r_star=float(v_star),
        case_fired=case,
        v_s=v_s,
        v_z=v_z,
        rho=rho,
        rho_c=rho_c,
        f_at_star=float(objective_f(inst, v_star)),
    )


def brute_force_argmin(inst: OptimizerInstance, grid_points: int = 100_000) -> float:
    """Grid argmin of the objective over the whole feasible interval (test oracle)."""
    if grid_points < 1000:
        raise InvalidInput(f"grid_points must be >= 1000, got {grid_points}")
    grid = np.linspace(inst.lower_bound, inst.v_c, int(grid_points))
    return float(grid[int(np.argmin(objective_f(inst, grid)))])


def estimation_gain(inst: OptimizerInstance, v_r: float) -> float:
    """Estimation objective up to the constant ``sigma**-4`` factor.

    ``(v_c**2 - v_r**2) h**2 / (r**2 (r**2 - 2 r v_r h + v_c**2 h**2)**2)``;
    only ratios of it are used (adaptive weighting).
    """
    r, v_c, h = inst.r, inst.v_c, inst.h
    xi = r * r - 2.0 * r * v_r * h + v_c * v_c * h * h
    return (v_c * v_c - v_r * v_r) * h * h / (r * r * xi * xi)
