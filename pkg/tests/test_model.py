"""Dynamics oracles: equilibria, frozen regression vectors, scaling law,
finite-difference derivative gate, kinematic consistency, pendulum period."""

import numpy as np
import pytest

from craneopt import (
    Controls,
    CraneParams,
    RopeLengthError,
    SpatialState,
    TimeState,
    ZeroVelocityError,
    dynamics_jacobians,
    recover_trolley,
    spatial_dynamics,
    time_dynamics,
)
from craneopt.validation import rk4_fixed

P = CraneParams(m1=1.2, m2=0.6, g=9.81, h=4.5)
HOVER = TimeState(0.0, 0.0, 3.0, 0.0, 3.0, 0.0, 0.0, 0.0)

# independently computed by direct symbolic evaluation of the equations of
# motion at the generic point below (one-off script, values frozen)
GENERIC_STATE = TimeState(0.3, 0.4, 2.5, -0.1, 2.6, -0.2, 0.05, 0.01)
GENERIC_CONTROLS = Controls(0.5, 4.0)
GENERIC_TIME_DERIV = np.array([
    0.4,
    -0.33319446180452217,
    -0.1,
    3.151664930700225,
    -0.2,
    3.1021823427418793,
    0.01,
    -0.4110887000466554,
])
GENERIC_SPATIAL_DERIV = np.array([
    2.5,
    -0.8329861545113055,
    -0.25,
    7.879162326750563,
    -0.5,
    7.755455856854698,
    0.025,
    -1.0277217501166385,
])


class TestTimeDynamics:
    def test_hover_equilibrium_is_exact(self):
        deriv = time_dynamics(HOVER, Controls(0.0, P.m2 * P.g), P)
        np.testing.assert_array_equal(deriv, np.zeros(8))

    def test_free_fall(self):
        deriv = time_dynamics(HOVER, Controls(0.0, 0.0), P)
        expected = np.zeros(8)
        expected[3] = P.g
        expected[5] = P.g
        np.testing.assert_allclose(deriv, expected, atol=1e-15)

    def test_generic_point_regression(self):
        deriv = time_dynamics(GENERIC_STATE, GENERIC_CONTROLS, P)
        np.testing.assert_allclose(deriv, GENERIC_TIME_DERIV, rtol=1e-14)

    def test_nonpositive_rope_rejected(self):
        with pytest.raises(RopeLengthError):
            TimeState(0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        bad = object.__new__(TimeState)
        for name, val in zip(
            ("x_p", "v_p", "y_p", "w_p", "l", "l_dot", "theta", "theta_dot"),
            (0.0, 0.0, 3.0, 0.0, -1.0, 0.0, 0.0, 0.0),
        ):
            object.__setattr__(bad, name, val)
        with pytest.raises(RopeLengthError):
            time_dynamics(bad, Controls(0.0, 0.0), P)


class TestSpatialDynamics:
    def test_scaling_identity_at_generic_point(self):
        s = SpatialState(1.0, 0.4, 2.5, -0.1, 2.6, -0.2, 0.05, 0.01)
        deriv = spatial_dynamics(s, GENERIC_CONTROLS, P)
        np.testing.assert_allclose(deriv, GENERIC_SPATIAL_DERIV, rtol=1e-14)

    def test_hover_at_unit_speed(self):
        s = SpatialState(0.0, 1.0, 3.0, 0.0, 3.0, 0.0, 0.0, 0.0)
        deriv = spatial_dynamics(s, Controls(0.0, P.m2 * P.g), P)
        expected = np.zeros(8)
        expected[0] = 1.0
        np.testing.assert_array_equal(deriv, expected)

    def test_scaling_law_random_states(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            v = rng.uniform(0.05, 2.0)
            st = SpatialState(
                rng.uniform(0, 5), v, rng.uniform(0.5, 4.0), rng.uniform(-1, 1),
                rng.uniform(0.5, 4.5), rng.uniform(-1, 1),
                rng.uniform(-0.3, 0.3), rng.uniform(-0.5, 0.5),
            )
            u = Controls(rng.uniform(-1, 1), rng.uniform(0, 8))
            sd = spatial_dynamics(st, u, P)
            td = time_dynamics(
                TimeState(0.0, st.v_p, st.y_p, st.w_p, st.l, st.l_dot,
                          st.theta, st.theta_dot), u, P)
            np.testing.assert_allclose(v * sd[1:], td[1:], rtol=1e-12, atol=1e-12)
            assert v * sd[0] == pytest.approx(1.0, rel=1e-14)

    def test_zero_speed_rejected(self):
        s = SpatialState(0.0, 0.0, 3.0, 0.0, 3.0, 0.0, 0.0, 0.0)
        with pytest.raises(ZeroVelocityError):
            spatial_dynamics(s, Controls(0.0, 0.0), P)


class TestJacobians:
    def test_hover_hoist_column(self):
        _, d_control = dynamics_jacobians(HOVER, Controls(0.0, P.m2 * P.g), P, "time")
        assert d_control[3, 1] == pytest.approx(-1.0 / P.m2)
        assert d_control[3, 1] == pytest.approx(-1.6667, rel=1e-4)

    def test_first_row_is_velocity_selector(self):
        d_state, d_control = dynamics_jacobians(
            GENERIC_STATE, GENERIC_CONTROLS, P, "time")
        expected = np.zeros(8)
        expected[1] = 1.0
        np.testing.assert_array_equal(d_state[0], expected)
        np.testing.assert_array_equal(d_control[0], [0.0, 0.0])

    @pytest.mark.parametrize("which", ["time", "spatial"])
    def test_matches_central_differences_at_random_points(self, which):
        rng = np.random.default_rng(42)
        step = 1e-6
        for _ in range(100):
            base = np.array([
                rng.uniform(0.0, 2.0), rng.uniform(0.2, 1.5),
                rng.uniform(1.0, 4.0), rng.uniform(-0.5, 0.5),
                rng.uniform(1.0, 4.0), rng.uniform(-0.5, 0.5),
                rng.uniform(-0.09, 0.09), rng.uniform(-0.4, 0.4),
            ])
            u = np.array([rng.uniform(-1, 1), rng.uniform(0.5, 8)])
            cls = TimeState if which == "time" else SpatialState

            def f(s_vec, u_vec):
                state = cls.from_array(s_vec)
                ctrl = Controls(*u_vec)
                return (time_dynamics if which == "time" else spatial_dynamics)(
                    state, ctrl, P)

            d_state, d_control = dynamics_jacobians(
                cls.from_array(base), Controls(*u), P, which)
            fd_state = np.zeros((8, 8))
            for i in range(8):
                e = np.zeros(8)
                e[i] = step
                fd_state[:, i] = (f(base + e, u) - f(base - e, u)) / (2 * step)
            fd_control = np.zeros((8, 2))
            for i in range(2):
                e = np.zeros(2)
                e[i] = step
                fd_control[:, i] = (f(base, u + e) - f(base, u - e)) / (2 * step)
            scale = max(1.0, np.abs(fd_state).max())
            assert np.max(np.abs(d_state - fd_state)) / scale <= 1e-6
            scale_u = max(1.0, np.abs(fd_control).max())
            assert np.max(np.abs(d_control - fd_control)) / scale_u <= 1e-6

    def test_unknown_parametrization_rejected(self):
        with pytest.raises(ValueError):
            dynamics_jacobians(HOVER, Controls(0.0, 0.0), P, "arclength")


class TestRecoverTrolley:
    def test_zero_sway(self):
        s = TimeState(1.0, 0.0, 3.0, 0.0, 3.0, 0.0, 0.0, 0.0)
        assert recover_trolley(s) == pytest.approx(1.0)

    def test_positive_sway(self):
        s = TimeState(1.0, 0.0, 3.0 * np.cos(0.1), 0.0, 3.0, 0.0, 0.1, 0.0)
        assert recover_trolley(s) == pytest.approx(0.7004997500595156, abs=1e-12)

    def test_negative_sway_symmetry(self):
        s = SpatialState(0.0, 0.0, 3.0 * np.cos(0.1), 0.0, 3.0, 0.0, -0.1, 0.0)
        assert recover_trolley(s, x_p=0.0) == pytest.approx(0.29950024994048446, abs=1e-12)

    def test_spatial_state_requires_position(self):
        s = SpatialState(0.0, 0.0, 3.0, 0.0, 3.0, 0.0, 0.0, 0.0)
        with pytest.raises(TypeError):
            recover_trolley(s)


def _simulate(state0, control_law, duration, step=1e-3):
    def rhs(t, x):
        u1, u2 = control_law(t, x)
        return time_dynamics(TimeState.from_array(x), Controls(u1, u2), P)

    n = int(round(duration / step))
    return rk4_fixed(rhs, state0.as_array(), 0.0, duration, n)


class TestConsistencyPropagation:
    """y_p = l cos(theta) and its rate must survive long integrations."""

    @pytest.mark.parametrize("law", [
        lambda t, x: (0.3 * np.sin(1.3 * t), P.m2 * P.g + 0.3 * np.sin(0.9 * t + 0.4)),
        lambda t, x: (0.2, P.m2 * P.g),
        lambda t, x: (-0.25 * np.cos(0.7 * t), P.m2 * P.g + 0.2 * np.cos(1.7 * t)),
    ])
    def test_drift_below_tolerance_over_five_seconds(self, law):
        start = TimeState(0.0, 0.0, 3.0, 0.0, 3.0, 0.0, 0.0, 0.0)
        _, states = _simulate(start, law, duration=5.0)
        y, l, th = states[:, 2], states[:, 4], states[:, 6]
        w, ld, thd = states[:, 3], states[:, 5], states[:, 7]
        assert np.max(np.abs(y - l * np.cos(th))) <= 1e-6
        assert np.max(np.abs(w - (ld * np.cos(th) - l * thd * np.sin(th)))) <= 1e-6


class TestPendulumOracle:
    def test_small_angle_period(self):
        l0, theta0 = 3.0, 0.01
        start = TimeState(l0 * np.sin(theta0), 0.0, l0 * np.cos(theta0), 0.0,
                          l0, 0.0, theta0, 0.0)

        def law(t, x):
            l, th, thd = x[4], x[6], x[7]
            u2 = P.m2 * (l * thd ** 2 + P.g * np.cos(th))
            return -u2 * np.sin(th), u2

        times, states = _simulate(start, law, duration=8.0)
        # rope must stay untouched under the compensating law
        np.testing.assert_allclose(states[:, 4], l0, atol=1e-9)
        th = states[:, 6]
        crossings = []
        for i in range(1, len(th)):
            if th[i - 1] > 0.0 >= th[i]:
                frac = th[i - 1] / (th[i - 1] - th[i])
                crossings.append(times[i - 1] + frac * (times[i] - times[i - 1]))
        assert len(crossings) >= 3
        period = crossings[1] - crossings[0]
        assert period == pytest.approx(3.4746094143618937, rel=0.01)
