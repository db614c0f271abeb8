"""Tests for the flat maps and the path/speed-profile parameterization."""

import math

import numpy as np
import pytest

from flatplan.bspline import BSplineCurve, KnotVector, sample_curve, virtual_control_points
from flatplan.errors import DegeneratePathError, SingularFlatMapError
from flatplan.kinematics import (
    FlatSample,
    Input,
    State,
    VehicleParams,
    accel_decomposition,
    curvature_ratio,
    flat_to_input,
    flat_to_state,
    parameterized_state,
    path_speed_to_flat,
    steering_angle,
    steering_from_path,
)


def linear_profile(t_f, degree=4, num_ctrl=12):
    """Profile reproducing s(t) = t/t_f exactly (control points at Greville sites)."""
    kv = KnotVector.clamped_uniform(degree, num_ctrl, 0.0, t_f)
    greville = np.array(
        [kv.knots[j + 1 : j + 1 + degree].mean() for j in range(num_ctrl)]
    )
    return BSplineCurve(kv, (greville / t_f)[None, :])


def monotone_profile(rng, t_f, degree=4, num_ctrl=14, gentle=False):
    lo, hi = (0.8, 1.2) if gentle else (0.2, 1.0)
    inc = rng.uniform(lo, hi, size=num_ctrl - 1)
    vals = np.concatenate([[0.0], np.cumsum(inc)])
    vals /= vals[-1]
    kv = KnotVector.clamped_uniform(degree, num_ctrl, 0.0, t_f)
    return BSplineCurve(kv, vals[None, :])


def circle_path(radius, num_ctrl=48, degree=4):
    """Least-squares B-spline fit of a quarter circle arc."""
    kv = KnotVector.clamped_uniform(degree, num_ctrl)
    from flatplan.bspline import basis_matrix

    ts = np.linspace(0.0, 1.0, 2000)
    M = basis_matrix(kv, degree, ts)
    ang = 0.5 * math.pi * ts
    target = radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    ctrl, *_ = np.linalg.lstsq(M, target, rcond=None)
    return BSplineCurve(kv, ctrl.T)


def straight_path(length=100.0, num_ctrl=10, degree=4, direction=(1.0, 0.0)):
    """Straight segment traversed at constant parametric speed (Greville sites)."""
    kv = KnotVector.clamped_uniform(degree, num_ctrl)
    u = np.asarray(direction) / np.hypot(*direction)
    greville = np.array([kv.knots[j + 1 : j + 1 + degree].mean() for j in range(num_ctrl)])
    ctrl = u[:, None] * (length * greville)[None, :]
    return BSplineCurve(kv, ctrl)


class TestVehicleParams:
    def test_valid(self):
        VehicleParams(wheelbase=2.601, gamma_max=0.785, v_max=19.0, a_max=2.0)

    @pytest.mark.parametrize(
        "kw",
        [
            dict(wheelbase=0.0, gamma_max=0.5, v_max=1.0, a_max=1.0),
            dict(wheelbase=2.0, gamma_max=0.0, v_max=1.0, a_max=1.0),
            dict(wheelbase=2.0, gamma_max=1.6, v_max=1.0, a_max=1.0),
            dict(wheelbase=2.0, gamma_max=0.5, v_max=-1.0, a_max=1.0),
            dict(wheelbase=2.0, gamma_max=0.5, v_max=1.0, a_max=0.0),
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            VehicleParams(**kw)


class TestRawFlatMaps:
    def test_state_axis_aligned(self):
        st = flat_to_state(FlatSample(y=[0, 0], yd=[1, 0], ydd=[0, 0]))
        assert st.v == 1.0 and st.psi == 0.0

    def test_state_negative_axis(self):
        st = flat_to_state(FlatSample(y=[0, 0], yd=[0, -2], ydd=[0, 0]))
        assert st.v == 2.0
        assert st.psi == pytest.approx(-math.pi / 2)

    def test_state_three_four_five(self):
        st = flat_to_state(FlatSample(y=[1, 2], yd=[3, 4], ydd=[0, 0]))
        assert st.v == pytest.approx(5.0)
        assert st.psi == pytest.approx(math.atan2(4, 3))
        # cross-check against finite differences of y(t) = (3t, 4t)
        h = 1e-6
        fd = (np.array([3 * h, 4 * h]) - np.array([-3 * h, -4 * h])) / (2 * h)
        assert np.allclose(fd, [3, 4])

    def test_singular_state(self):
        with pytest.raises(SingularFlatMapError):
            flat_to_state(FlatSample(y=[0, 0], yd=[0, 0], ydd=[1, 1]))

    def test_input_at_rest_frame(self):
        u = flat_to_input(FlatSample(y=[0, 0], yd=[1, 0], ydd=[0, 0]))
        assert u.vdot == 0.0 and u.psidot == 0.0

    def test_input_example_values(self):
        u = flat_to_input(FlatSample(y=[0, 0], yd=[3, 4], ydd=[1, 2]))
        assert u.vdot == pytest.approx(2.2)
        assert u.psidot == pytest.approx(0.08)
        # finite-difference oracle on y(t) = (3t + t^2/2, 4t + t^2)
        h = 1e-6

        def y(t):
            return np.array([3 * t + t**2 / 2, 4 * t + t**2])

        v = lambda t: np.hypot(*((y(t + h) - y(t - h)) / (2 * h)))
        assert (v(h) - v(-h)) / (2 * h) == pytest.approx(2.2, abs=1e-6)

    def test_input_unit_circle(self):
        u = flat_to_input(FlatSample(y=[1, 0], yd=[0, 1], ydd=[-1, 0]))
        assert u.vdot == pytest.approx(0.0, abs=1e-15)
        assert u.psidot == pytest.approx(1.0)


class TestParameterization:
    def test_uniform_straight_motion(self):
        t_f = 10.0
        path = straight_path(length=100.0)
        profile = linear_profile(t_f)
        sample = path_speed_to_flat(path, profile, 3.7)
        assert np.allclose(sample.yd, [100.0 / t_f, 0.0], atol=1e-9)
        assert np.allclose(sample.ydd, [0.0, 0.0], atol=1e-8)

    def test_rest_start_has_zero_velocity_but_defined_heading(self):
        rng = np.random.default_rng(4)
        path = straight_path(length=50.0, direction=(1.0, 1.0))
        t_f = 6.0
        kv = KnotVector.clamped_uniform(4, 10, 0.0, t_f)
        # clamped repeated start control points give zero initial slope
        vals = np.concatenate([[0.0, 0.0], np.linspace(0.05, 1.0, 8)])
        profile = BSplineCurve(kv, vals[None, :])
        sample = path_speed_to_flat(path, profile, 0.0)
        assert np.allclose(sample.yd, 0.0)
        st, _ = parameterized_state(path, profile, 0.0)
        assert st.v == pytest.approx(0.0)
        assert st.psi == pytest.approx(math.pi / 4)

    def test_composite_matches_finite_differences(self):
        rng = np.random.default_rng(8)
        kv = KnotVector.clamped_uniform(4, 16)
        ctrl = np.cumsum(rng.uniform(0.2, 1.0, size=(2, 16)), axis=1)
        path = BSplineCurve(kv, ctrl)
        t_f = 7.0
        profile = monotone_profile(rng, t_f)
        h = 1e-6
        ts = np.linspace(0.05, t_f - 0.05, 100)
        for t in ts:
            samp = path_speed_to_flat(path, profile, float(t))
            fd = (
                path_speed_to_flat(path, profile, float(t) + h).y
                - path_speed_to_flat(path, profile, float(t) - h).y
            ) / (2 * h)
            assert np.allclose(samp.yd, fd, atol=1e-6 * (1 + np.abs(samp.yd).max()))

    def test_agreement_with_raw_maps_at_speed(self):
        rng = np.random.default_rng(15)
        kv = KnotVector.clamped_uniform(4, 16)
        ctrl = np.cumsum(rng.uniform(0.5, 1.5, size=(2, 16)), axis=1)
        path = BSplineCurve(kv, ctrl)
        t_f = 5.0
        profile = monotone_profile(rng, t_f)
        checked = 0
        for t in rng.uniform(0.0, t_f, size=200):
            sample = path_speed_to_flat(path, profile, float(t))
            st, u = parameterized_state(path, profile, float(t))
            if st.v <= 0.1:
                continue
            raw_st = flat_to_state(sample)
            raw_u = flat_to_input(sample)
            assert st.v == pytest.approx(raw_st.v, abs=1e-9)
            assert st.psi == pytest.approx(raw_st.psi, abs=1e-9)
            assert u.vdot == pytest.approx(raw_u.vdot, abs=1e-9)
            assert u.psidot == pytest.approx(raw_u.psidot, abs=1e-9)
            checked += 1
        assert checked >= 100

    def test_degenerate_path(self):
        kv = KnotVector.clamped_uniform(3, 8)
        path = BSplineCurve(kv, np.zeros((2, 8)))
        profile = linear_profile(1.0)
        with pytest.raises(DegeneratePathError):
            parameterized_state(path, profile, 0.5)


class TestCircleAnalytics:
    # A fitted spline reproduces the arc to ~1e-8; analytic circle values are
    # asserted with tolerances dominated by the fit error.
    RADIUS = 40.0

    def test_yaw_rate_on_circle(self):
        path = circle_path(self.RADIUS)
        t_f = 12.0
        profile = linear_profile(t_f)
        for t in [1.0, 4.0, 9.5]:
            st, u = parameterized_state(path, profile, t)
            assert u.psidot == pytest.approx(st.v / self.RADIUS, rel=1e-5)

    def test_steering_on_circle(self):
        L = 2.601
        path = circle_path(self.RADIUS)
        profile = linear_profile(3.0)
        expected = math.atan(L / self.RADIUS)
        gammas = [steering_angle(path, profile, L, t) for t in np.linspace(0.2, 2.8, 25)]
        assert np.allclose(gammas, expected, rtol=1e-5)

    def test_curvature_on_circle(self):
        path = circle_path(self.RADIUS)
        for s in np.linspace(0.05, 0.95, 19):
            assert curvature_ratio(path, float(s)) == pytest.approx(1.0 / self.RADIUS, rel=1e-5)


class TestStraightAnalytics:
    def test_zero_steering_and_curvature(self):
        path = straight_path(length=80.0, direction=(2.0, 1.0))
        profile = linear_profile(4.0)
        for t in np.linspace(0.0, 4.0, 9):
            assert steering_angle(path, profile, 2.6, float(t)) == pytest.approx(0.0, abs=1e-12)
        for s in np.linspace(0.0, 1.0, 9):
            assert curvature_ratio(path, float(s)) == pytest.approx(0.0, abs=1e-12)

    def test_steering_is_profile_invariant(self):
        rng = np.random.default_rng(23)
        kv = KnotVector.clamped_uniform(4, 14)
        ctrl = np.cumsum(rng.uniform(0.3, 1.2, size=(2, 14)), axis=1)
        path = BSplineCurve(kv, ctrl)
        prof_a = linear_profile(5.0)
        prof_b = monotone_profile(rng, 5.0)
        svals = np.linspace(0.1, 0.9, 17)
        for s in svals:
            g = steering_from_path(path, 2.6, float(s))
            # locate times where each profile passes through s
            for prof in (prof_a, prof_b):
                ts = np.linspace(0.0, 5.0, 4001)
                sv = sample_curve(prof, 0, ts)[0]
                t_hit = float(ts[np.argmin(np.abs(sv - s))])
                s_hit = float(sv[np.argmin(np.abs(sv - s))])
                assert steering_angle(path, prof, 2.6, t_hit) == pytest.approx(
                    steering_from_path(path, 2.6, s_hit), abs=1e-12
                )


class TestAccelDecomposition:
    def test_sum_matches_speed_derivative(self):
        rng = np.random.default_rng(31)
        kv = KnotVector.clamped_uniform(4, 14)
        ctrl = np.cumsum(rng.uniform(0.3, 1.0, size=(2, 14)), axis=1)
        path = BSplineCurve(kv, ctrl)
        t_f = 6.0
        profile = monotone_profile(rng, t_f)
        h = 1e-6
        for t in np.linspace(0.2, t_f - 0.2, 40):
            dec = accel_decomposition(path, profile, float(t))
            v_plus = parameterized_state(path, profile, float(t) + h)[0].v
            v_minus = parameterized_state(path, profile, float(t) - h)[0].v
            fd = (v_plus - v_minus) / (2 * h)
            assert dec.a_t + dec.a_n == pytest.approx(fd, abs=1e-8 * (1 + abs(fd)))


class TestOdeConsistency:
    def test_flat_trajectory_satisfies_dynamics(self):
        # Reconstructed state/input satisfy the bicycle model equations when
        # the state history is differentiated numerically.
        # Random monotone composition; the residual is checked away from the
        # clamped end spans where an unconstrained random spline has tangent
        # magnitudes (and hence finite-difference truncation) blown up by the
        # endpoint knot multiplicity.
        rng = np.random.default_rng(42)
        kv = KnotVector.clamped_uniform(4, 16)
        ctrl = np.cumsum(rng.uniform(0.9, 1.1, size=(2, 16)), axis=1)
        path = BSplineCurve(kv, ctrl)
        t_f = 8.0
        profile = monotone_profile(rng, t_f, gentle=True)
        ts = np.linspace(1.0, t_f - 1.0, 6001)
        states = np.empty((len(ts), 4))
        inputs = np.empty((len(ts), 2))
        for i, t in enumerate(ts):
            st, u = parameterized_state(path, profile, float(t))
            states[i] = [st.x, st.y, st.v, st.psi]
            inputs[i] = [u.vdot, u.psidot]
        dt = ts[1] - ts[0]
        xdot = (states[2:] - states[:-2]) / (2 * dt)
        mid_states, mid_inputs = states[1:-1], inputs[1:-1]
        rhs = np.stack(
            [
                mid_states[:, 2] * np.cos(mid_states[:, 3]),
                mid_states[:, 2] * np.sin(mid_states[:, 3]),
                mid_inputs[:, 0],
                mid_inputs[:, 1],
            ],
            axis=1,
        )
        residual = np.linalg.norm(xdot - rhs, axis=1)
        assert residual.max() < 1e-5
