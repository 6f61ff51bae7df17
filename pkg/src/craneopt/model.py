"""Crane equations of motion, in time- and position-parametrized form.

The trolley runs along a horizontal bridge at height ``h`` above ground; the
payload hangs from it on a rope of length ``l`` with sway angle ``theta``.
``y_p`` measures the payload offset *downward* from the trolley, so the
payload sits ``h - y_p`` above ground.  Two parametrizations of the same
dynamics are provided:

* time form: state ``(x_p, v_p, y_p, w_p, l, l_dot, theta, theta_dot)``,
  derivatives per second;
* position form: state ``(t, v_p, y_p, w_p, l, l_dot, theta, theta_dot)``,
  derivatives per meter of payload travel, valid while ``v_p > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import RopeLengthError, ZeroVelocityError

TIME_STATE_FIELDS = ("x_p", "v_p", "y_p", "w_p", "l", "l_dot", "theta", "theta_dot")
SPATIAL_STATE_FIELDS = ("t", "v_p", "y_p", "w_p", "l", "l_dot", "theta", "theta_dot")


@dataclass(frozen=True)
class CraneParams:
    """Physical constants: trolley/payload masses, gravity, trolley height."""

    m1: float
    m2: float
    g: float = 9.81
    h: float = 4.5

    def __post_init__(self):
        for name in ("m1", "m2", "g", "h"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"CraneParams.{name} must be positive")


@dataclass(frozen=True)
class Controls:
    """Trolley force and hoist force, in newtons."""

    F_t: float
    F_h: float


@dataclass(frozen=True)
class TimeState:
    """Crane state with time as the independent variable."""

    x_p: float
    v_p: float
    y_p: float
    w_p: float
    l: float
    l_dot: float
    theta: float
    theta_dot: float

    def __post_init__(self):
        if not self.l > 0.0:
            raise RopeLengthError(self.l)

    def as_array(self):
        return np.array([getattr(self, f) for f in TIME_STATE_FIELDS])

    @classmethod
    def from_array(cls, values):
        return cls(*map(float, values))


@dataclass(frozen=True)
class SpatialState:
    """Crane state parametrized by payload position; time is a component."""

    t: float
    v_p: float
    y_p: float
    w_p: float
    l: float
    l_dot: float
    theta: float
    theta_dot: float

    def __post_init__(self):
        if not self.l > 0.0:
            raise RopeLengthError(self.l)
        if self.t < 0.0:
            raise ValueError(f"elapsed time must be nonnegative, got {self.t}")
        if self.v_p < 0.0:
            raise ValueError(
                f"horizontal speed must be nonnegative, got {self.v_p} "
                "(the payload traverses monotonically)"
            )

    def as_array(self):
        return np.array([getattr(self, f) for f in SPATIAL_STATE_FIELDS])

    @classmethod
    def from_array(cls, values):
        return cls(*map(float, values))


def common_rates(v, w, l, ld, th, thd, u1, u2, m1, m2, g):
    """Second-through-eighth time derivatives shared by both parametrizations.

    Returns ``(dv, dy, dw, dl, dld, dth, dthd)``.  Accepts scalars, ndarrays
    or dual numbers, so the same expression backs plain evaluation, the
    vectorized collocation residuals and all derivative computations.
    """
    s = ad.sin(th)
    c = ad.cos(th)
    trolley_acc = (u1 + u2 * s) / m1
    return (
        -(u2 * s) / m2,
        w,
        g - (u2 * c) / m2,
        ld,
        l * thd * thd + g * c - u2 / m2 - s * trolley_acc,
        thd,
        -(2.0 * ld * thd + g * s + c * trolley_acc) / l,
    )


def time_dynamics(state: TimeState, u: Controls, p: CraneParams) -> np.ndarray:
    """Time derivative of the eight-component state under controls ``u``."""
    if not state.l > 0.0:
        raise RopeLengthError(state.l)
    rates = common_rates(
        state.v_p, state.w_p, state.l, state.l_dot, state.theta, state.theta_dot,
        u.F_t, u.F_h, p.m1, p.m2, p.g,
    )
    return np.array((state.v_p, *rates))


def spatial_dynamics(state: SpatialState, u: Controls, p: CraneParams) -> np.ndarray:
    """Per-meter derivative of the position-parametrized state.

    Requires ``v_p > 0``; every component is the time-form rate divided by
    the horizontal speed, and the time component advances as ``1 / v_p``.
    """
    if not state.l > 0.0:
        raise RopeLengthError(state.l)
    if not state.v_p > 0.0:
        raise ZeroVelocityError(state.v_p)
    rates = common_rates(
        state.v_p, state.w_p, state.l, state.l_dot, state.theta, state.theta_dot,
        u.F_t, u.F_h, p.m1, p.m2, p.g,
    )
    inv = 1.0 / state.v_p
    return np.array((inv, *(r * inv for r in rates)))


def dynamics_jacobians(state, u: Controls, p: CraneParams, which: str = "time"):
    """State and control Jacobians of the selected dynamics.

    Returns ``(d_state, d_control)`` with shapes (8, 8) and (8, 2), computed
    by a forward-mode sweep over the shared dynamics expression.
    """
    if which not in ("time", "spatial"):
        raise ValueError(f"which must be 'time' or 'spatial', got {which!r}")
    if not state.l > 0.0:
        raise RopeLengthError(state.l)
    if which == "spatial" and not state.v_p > 0.0:
        raise ZeroVelocityError(state.v_p)
    x = ad.seed([*state.as_array(), u.F_t, u.F_h])
    rates = common_rates(x[1], x[3], x[4], x[5], x[6], x[7], x[8], x[9], p.m1, p.m2, p.g)
    if which == "time":
        rows = [x[1], *rates]
    else:
        inv = 1.0 / x[1]
        rows = [inv, *(r * inv for r in rates)]
    full = np.array([row.der for row in rows])
    return full[:, :8], full[:, 8:]


def recover_trolley(state, x_p=None) -> float:
    """Trolley position for a given state: payload position minus rope swing.

    Time-form states carry their own ``x_p``; for position-form states the
    payload position must be passed explicitly.
    """
    if isinstance(state, TimeState):
        if x_p is None:
            x_p = state.x_p
    elif x_p is None:
        raise TypeError("x_p is required for position-parametrized states")
    return x_p - state.l * math.sin(state.theta)
