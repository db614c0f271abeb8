"""Flat maps of the kinematic bicycle model and the path/speed parameterization.

The rear-wheel position is the flat output: state and input are algebraic in
the output and its first two derivatives.  A spatial curve composed with a
monotone time reparameterization gives the output, which keeps heading,
steering and acceleration well defined even where the speed vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bspline import BSplineCurve, sample_curve
from .errors import (
    DegeneratePathError,
    ParameterizationRangeError,
    SingularFlatMapError,
)

# Below this speed (m/s) only the path-parameterized formulas are used; the
# raw flat maps divide by the speed and degrade first.
SPEED_EPS = 1e-6

# Tolerance for the reparameterization leaving the unit interval.
RANGE_TOL = 1e-9


@dataclass(frozen=True)
class VehicleParams:
    """Vehicle limits: wheelbase [m], steering bound [rad], speed and
    acceleration bounds [m/s, m/s^2]."""

    wheelbase: float
    gamma_max: float
    v_max: float
    a_max: float

    def __post_init__(self):
        if not self.wheelbase > 0:
            raise ValueError("wheelbase must be positive")
        if not 0 < self.gamma_max < math.pi / 2:
            raise ValueError("steering bound must lie in (0, pi/2)")
        if not self.v_max > 0:
            raise ValueError("speed bound must be positive")
        if not self.a_max > 0:
            raise ValueError("acceleration bound must be positive")


@dataclass(frozen=True)
class State:
    """Rear-wheel position [m], speed [m/s], heading [rad]."""

    x: float
    y: float
    v: float
    psi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.v, self.psi])


@dataclass(frozen=True)
class Input:
    """Acceleration [m/s^2] and yaw rate [rad/s]."""

    vdot: float
    psidot: float


@dataclass(frozen=True)
class FlatSample:
    """Flat output and its first two time derivatives at one instant."""

    y: np.ndarray
    yd: np.ndarray
    ydd: np.ndarray

    def __post_init__(self):
        for name in ("y", "yd", "ydd"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


@dataclass(frozen=True)
class AccelDecomposition:
    """Split of the linear acceleration into the reparameterization term and
    the path-stretching term; their sum is the speed derivative."""

    a_t: float
    a_n: float


def flat_to_state(sample: FlatSample) -> State:
    """Raw flat map to the state; undefined at zero speed."""
    v = float(np.hypot(sample.yd[0], sample.yd[1]))
    if v == 0.0:
        raise SingularFlatMapError("flat map state undefined at zero speed")
    psi = math.atan2(sample.yd[1], sample.yd[0])
    return State(x=float(sample.y[0]), y=float(sample.y[1]), v=v, psi=psi)


def flat_to_input(sample: FlatSample) -> Input:
    """Raw flat map to the input; undefined at zero speed."""
    v = float(np.hypot(sample.yd[0], sample.yd[1]))
    if v == 0.0:
        raise SingularFlatMapError("flat map input undefined at zero speed")
    vdot = float(sample.yd @ sample.ydd) / v
    psidot = float(sample.ydd[1] * sample.yd[0] - sample.ydd[0] * sample.yd[1]) / v**2
    return Input(vdot=vdot, psidot=psidot)


def _profile_scalars(profile: BSplineCurve, t: float) -> tuple[float, float, float]:
    s = float(sample_curve(profile, 0, np.array([t]))[0, 0])
    sd = float(sample_curve(profile, 1, np.array([t]))[0, 0])
    sdd = float(sample_curve(profile, 2, np.array([t]))[0, 0])
    if s < -RANGE_TOL or s > 1.0 + RANGE_TOL:
        raise ParameterizationRangeError(f"profile value {s} outside [0, 1]")
    return min(max(s, 0.0), 1.0), sd, sdd


def _path_frame(path: BSplineCurve, s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sv = np.array([s])
    return (
        sample_curve(path, 0, sv)[:, 0],
        sample_curve(path, 1, sv)[:, 0],
        sample_curve(path, 2, sv)[:, 0],
    )


def path_speed_to_flat(path: BSplineCurve, profile: BSplineCurve, t: float) -> FlatSample:
    """Flat output and derivatives of the composed curve at time t."""
    s, sd, sdd = _profile_scalars(profile, t)
    p, d1, d2 = _path_frame(path, s)
    return FlatSample(y=p, yd=sd * d1, ydd=sdd * d1 + sd**2 * d2)


def parameterized_state(path: BSplineCurve, profile: BSplineCurve, t: float) -> tuple[State, Input]:
    """State and input from the path tangent frame; finite at zero speed.

    Agrees with the raw flat maps wherever the speed is positive; heading and
    yaw rate come from the path alone so rest points inherit the direction
    the path departs in.
    """
    s, sd, sdd = _profile_scalars(profile, t)
    p, d1, d2 = _path_frame(path, s)
    n1 = float(np.hypot(d1[0], d1[1]))
    if n1 == 0.0:
        raise DegeneratePathError("path tangent vanished; heading undefined")
    v = sd * n1
    psi = math.atan2(d1[1], d1[0])
    a_t = sdd * n1
    a_n = sd**2 * float(d1 @ d2) / n1
    cross = float(d1[0] * d2[1] - d1[1] * d2[0])
    psidot = sd * cross / n1**2
    return (
        State(x=float(p[0]), y=float(p[1]), v=v, psi=psi),
        Input(vdot=a_t + a_n, psidot=psidot),
    )


def accel_decomposition(path: BSplineCurve, profile: BSplineCurve, t: float) -> AccelDecomposition:
    s, sd, sdd = _profile_scalars(profile, t)
    _, d1, d2 = _path_frame(path, s)
    n1 = float(np.hypot(d1[0], d1[1]))
    if n1 == 0.0:
        raise DegeneratePathError("path tangent vanished")
    return AccelDecomposition(a_t=sdd * n1, a_n=sd**2 * float(d1 @ d2) / n1)


def steering_from_path(path: BSplineCurve, wheelbase: float, s: float) -> float:
    """Steering angle at a path location; independent of the speed profile."""
    _, d1, d2 = _path_frame(path, s)
    n1 = float(np.hypot(d1[0], d1[1]))
    if n1 == 0.0:
        raise DegeneratePathError("path tangent vanished; steering undefined")
    cross = float(d1[0] * d2[1] - d1[1] * d2[0])
    return math.atan(wheelbase * cross / n1**3)


def steering_angle(path: BSplineCurve, profile: BSplineCurve, wheelbase: float, t: float) -> float:
    """Steering angle at time t."""
    s, _, _ = _profile_scalars(profile, t)
    return steering_from_path(path, wheelbase, s)


def curvature_ratio(path: BSplineCurve, s: float) -> float:
    """Unsigned curvature |x'y'' - y'x''| / |theta'|^3 at a path location."""
    _, d1, d2 = _path_frame(path, s)
    n1 = float(np.hypot(d1[0], d1[1]))
    if n1 == 0.0:
        raise DegeneratePathError("path tangent vanished; curvature undefined")
    cross = float(d1[0] * d2[1] - d1[1] * d2[0])
    return abs(cross) / n1**3


def sample_path_frames(path: BSplineCurve, svals: np.ndarray):
    """Vectorized position and first two path derivatives; each (2, n)."""
    return (
        sample_curve(path, 0, svals),
        sample_curve(path, 1, svals),
        sample_curve(path, 2, svals),
    )


def sample_profile(profile: BSplineCurve, ts: np.ndarray):
    """Vectorized reparameterization value and derivatives; each (n,)."""
    s = sample_curve(profile, 0, ts)[0]
    sd = sample_curve(profile, 1, ts)[0]
    sdd = sample_curve(profile, 2, ts)[0]
    if np.any(s < -RANGE_TOL) or np.any(s > 1.0 + RANGE_TOL):
        bad = float(s[(s < -RANGE_TOL) | (s > 1.0 + RANGE_TOL)][0])
        raise ParameterizationRangeError(f"profile value {bad} outside [0, 1]")
    return np.clip(s, 0.0, 1.0), sd, sdd
