import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bearing_search.errors import DegenerateGeometry, InvalidInput
from bearing_search.geometry import Pose2D, wrap_angle
from bearing_search.vehicle import (
    VehicleParams,
    VelocityDecomposition,
    chord_length,
    displacement_heading,
    dubins_step,
    omega_from_decomposition,
    tangential_sign,
)

PI = math.pi
P = VehicleParams(v_c=4.0, h=0.25)


@pytest.mark.parametrize(
    "kwargs", [dict(v_c=0), dict(h=-1), dict(omega_max=0), dict(v_c=math.inf)]
)
def test_params_validation(kwargs):
    with pytest.raises(InvalidInput):
        VehicleParams(**kwargs)


@pytest.mark.parametrize(
    "start, omega, expected",
    [
        ((0, 0, 0), 0.0, (1.0, 0.0, 0.0)),
        ((0, 0, 0), 2.0, (0.958851, 0.244835, 0.5)),
        ((5, 5, PI), 0.0, (4.0, 5.0, PI)),
    ],
)
def test_dubins_examples(start, omega, expected):
    nxt = dubins_step(Pose2D(*start), omega, P)
    assert (nxt.x, nxt.y) == pytest.approx(expected[:2], abs=1e-6)
    assert abs(wrap_angle(nxt.theta - expected[2])) < 1e-12


def test_dubins_respects_omega_max():
    p = VehicleParams(omega_max=1.0)
    with pytest.raises(InvalidInput):
        dubins_step(Pose2D(0, 0, 0), 1.5, p)


def test_omega_continuity_at_zero():
    a = dubins_step(Pose2D(3, -2, 0.7), 0.0, P)
    for w in (1e-12, -1e-12):
        b = dubins_step(Pose2D(3, -2, 0.7), w, P)
        assert math.hypot(a.x - b.x, a.y - b.y) < 1e-9


@given(st.floats(-40, 40), st.floats(-PI, PI))
def test_step_length_is_chord(omega, th):
    start = Pose2D(1.0, 2.0, th)
    nxt = dubins_step(start, omega, P)
    step = math.hypot(nxt.x - start.x, nxt.y - start.y)
    assert step == pytest.approx(abs(chord_length(omega, P)), abs=1e-12)
    assert step <= P.v_c * P.h + 1e-12


def test_chord_taylor_branch_matches_direct():
    w = 3e-6 / P.h  # just above the switch
    direct = 2 * P.v_c / w * math.sin(w * P.h / 2)
    assert chord_length(w, P) == pytest.approx(direct, rel=1e-12)
    assert chord_length(0.0, P) == P.v_c * P.h


@pytest.mark.parametrize(
    "v_r, v_t, phi, theta, expected",
    [(4, 0, PI / 2, 0, 0.0), (4, 0, 0, 0, 4 * PI), (0, 4, PI / 2, 0, -4 * PI)],
)
def test_omega_examples(v_r, v_t, phi, theta, expected):
    w = omega_from_decomposition(VelocityDecomposition(v_r, v_t), phi, theta, P)
    assert w == pytest.approx(expected, abs=1e-12)


def test_omega_is_clamped():
    p = VehicleParams(omega_max=2.0)
    assert omega_from_decomposition(VelocityDecomposition(4, 0), 0, 0, p) == 2.0
    assert omega_from_decomposition(VelocityDecomposition(0, 4), PI / 2, 0, p) == -2.0


def test_zero_decomposition_is_degenerate():
    with pytest.raises(DegenerateGeometry):
        omega_from_decomposition(VelocityDecomposition(0, 0), 0.3, 0.0, P)


def test_tangential_sign_examples():
    assert tangential_sign(4.0, 0.3, 1.0, P) == VelocityDecomposition(4.0, 0.0)
    # heading -x, target at +x: both turns are pi/2, tie goes positive
    d = tangential_sign(0.0, PI / 2, PI, P)
    assert d.v_t == 4.0
    d = tangential_sign(0.792079, 0.0, 0.0, P)
    assert abs(d.v_t) == pytest.approx(3.920792, abs=1e-6)


def test_tangential_sign_rejects_overspeed():
    with pytest.raises(InvalidInput):
        tangential_sign(4.5, 0.0, 0.0, P)


@given(st.floats(0, 4), st.floats(-PI, PI), st.floats(-PI, PI))
def test_decomposition_speed_and_smaller_turn(v_r, phi, theta):
    d = tangential_sign(v_r, phi, theta, P)
    assert math.hypot(d.v_r, d.v_t) == pytest.approx(P.v_c, rel=1e-9)
    other = VelocityDecomposition(d.v_r, -d.v_t)
    w = omega_from_decomposition(d, phi, theta, P)
    w_other = omega_from_decomposition(other, phi, theta, P)
    assert abs(w) <= abs(w_other) + 1e-9


@given(st.floats(0, 4), st.booleans(), st.floats(-PI, PI), st.floats(-PI, PI))
def test_mid_step_heading_round_trip(v_r, neg, phi, theta):
    v_t = math.sqrt(max(16.0 - v_r * v_r, 0.0)) * (-1 if neg else 1)
    d = VelocityDecomposition(v_r, v_t)
    w = omega_from_decomposition(d, phi, theta, P)
    mid = theta + w * P.h / 2
    want = math.atan2(v_r * math.cos(phi) - v_t * math.sin(phi), v_r * math.sin(phi) + v_t * math.cos(phi))
    assert abs(wrap_angle(mid - want)) < 1e-9
    assert abs(wrap_angle(displacement_heading(d, phi) - want)) < 1e-12
