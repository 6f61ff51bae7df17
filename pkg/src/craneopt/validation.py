"""Time-domain certification of planned trajectories.

A planned trajectory only satisfies the dynamics at collocation nodes and
the stack bounds at node positions.  This module re-integrates the original
time-parametrized equations of motion under the planned piecewise-constant
controls, then checks clearance, floor, sway and terminal accuracy on the
dense samples in between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RopeLengthError
from .model import CraneParams, common_rates
from .stacks import StackProfile, stack_height

__all__ = [
    "CLEARANCE_BUDGET",
    "TERMINAL_BUDGET",
    "DenseTrajectory",
    "ValidationReport",
    "rk4_fixed",
    "simulate_time_domain",
    "check_clearance",
    "analytic_lower_bound",
    "validate_trajectory",
]

# default certification budgets for a 100-interval plan; both contract by
# roughly 4x when the interval count doubles
CLEARANCE_BUDGET = 5e-3
TERMINAL_BUDGET = 5e-2


@dataclass(frozen=True)
class DenseTrajectory:
    """Fixed-step integration output: times and time-form state rows."""

    t: np.ndarray        # (S + 1,)
    states: np.ndarray   # (S + 1, 8): x_p, v_p, y_p, w_p, l, l_dot, theta, theta_dot


@dataclass(frozen=True)
class ValidationReport:
    """Worst-case deviations of the re-simulated motion."""

    terminal_error: float            # inf-norm of final-state mismatch
    max_clearance_violation: float   # payload dipping below the stack corridor
    max_floor_violation: float
    sway_peak: float
    time_monotone: bool
    lower_bound_ok: bool
    terminal_mismatch: tuple = ()    # per-component detail
    objective: float = float("nan")

    def as_dict(self):
        return {
            "terminal_error": self.terminal_error,
            "max_clearance_violation": self.max_clearance_violation,
            "max_floor_violation": self.max_floor_violation,
            "sway_peak": self.sway_peak,
            "time_monotone": self.time_monotone,
            "lower_bound_ok": self.lower_bound_ok,
        }

    def within_budget(self, clearance=CLEARANCE_BUDGET, terminal=TERMINAL_BUDGET) -> bool:
        return (
            self.terminal_error <= terminal
            and self.max_clearance_violation <= clearance
            and self.max_floor_violation <= clearance
            and self.time_monotone
            and self.lower_bound_ok
        )


def _time_rhs(state, u1, u2, p: CraneParams):
    if state[4] <= 0.0:
        raise RopeLengthError(state[4])
    rates = common_rates(
        state[1], state[3], state[4], state[5], state[6], state[7],
        u1, u2, p.m1, p.m2, p.g,
    )
    return np.array((state[1], *rates))


def rk4_fixed(f, x0, t0, t1, n_steps):
    """Classical fixed-step 4th-order integration; returns (times, states)."""
    h = (t1 - t0) / n_steps
    times = t0 + h * np.arange(n_steps + 1)
    out = np.empty((n_steps + 1, np.size(x0)))
    x = np.array(x0, dtype=float)
    out[0] = x
    for i in range(n_steps):
        t = times[i]
        k1 = f(t, x)
        k2 = f(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = f(t + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = x
    return times, out


def simulate_time_domain(trajectory, scenario, n_steps: int = 5000) -> DenseTrajectory:
    """Re-integrate the time-form dynamics under the planned controls.

    Controls are looked up by membership of the simulation time in the node
    time intervals (never by position, which could transiently reverse).
    """
    times = trajectory.times
    if len(times) < 2:
        raise ValueError("trajectory needs at least two nodes")
    if np.any(np.diff(times) < 0.0):
        raise ValueError("node times must be nondecreasing")
    controls = trajectory.control_array()
    n_int = len(controls)
    p = scenario.params

    x_p0, spatial0 = trajectory.nodes[0]
    x0 = np.array([
        x_p0, spatial0.v_p, spatial0.y_p, spatial0.w_p,
        spatial0.l, spatial0.l_dot, spatial0.theta, spatial0.theta_dot,
    ])

    def control_at(tau):
        k = int(np.searchsorted(times, tau, side="right")) - 1
        return controls[min(max(k, 0), n_int - 1)]

    def rhs(tau, state):
        u1, u2 = control_at(tau)
        return _time_rhs(state, u1, u2, p)

    t_grid, states = rk4_fixed(rhs, x0, times[0], times[-1], n_steps)
    return DenseTrajectory(t=t_grid, states=states)


def check_clearance(dense: DenseTrajectory, profile: StackProfile,
                    params: CraneParams, y_floor: float):
    """Worst corridor/floor violations and sway peak over all dense samples."""
    if np.any(np.diff(dense.t) < 0.0):
        raise ValueError("dense samples must be sorted in time")
    x_p = dense.states[:, 0]
    y_p = dense.states[:, 2]
    bound = params.h - stack_height(profile, x_p)
    clearance = float(np.max(np.maximum(y_p - bound, 0.0)))
    floor = float(np.max(np.maximum(y_floor - y_p, 0.0)))
    sway = float(np.max(np.abs(dense.states[:, 6])))
    return clearance, floor, sway


def analytic_lower_bound(scenario) -> float:
    """Unbeatable traverse time: force-limited rigid translation of all mass.

    The combined horizontal momentum obeys (m1*x + m2*x_p)'' = F_t, so no
    rest-to-rest motion over the same distance can beat the bang-bang time of
    a single rigid mass m1 + m2 under the same force cap.
    """
    f_max = scenario.bounds.Ft_max
    if not f_max > 0.0:
        raise ValueError("the trolley force upper bound must be positive")
    d = abs(scenario.x_p_end - scenario.x_p_start)
    total = scenario.params.m1 + scenario.params.m2
    return 2.0 * math.sqrt(d * total / f_max)


def validate_trajectory(trajectory, scenario, n_steps: int = 5000):
    """Full certification: returns ``(ValidationReport, DenseTrajectory)``."""
    dense = simulate_time_domain(trajectory, scenario, n_steps=n_steps)
    clearance, floor, sway = check_clearance(
        dense, scenario.profile, scenario.params, scenario.bounds.y_floor
    )
    final = scenario.boundary.final
    target = np.array([
        scenario.x_p_end, final.v_p, final.y_p, final.w_p,
        final.l, final.l_dot, final.theta, final.theta_dot,
    ])
    mismatch = dense.states[-1] - target
    times = trajectory.times
    report = ValidationReport(
        terminal_error=float(np.max(np.abs(mismatch))),
        max_clearance_violation=clearance,
        max_floor_violation=floor,
        sway_peak=sway,
        time_monotone=bool(np.all(np.diff(times) >= 0.0)),
        lower_bound_ok=bool(
            trajectory.objective >= analytic_lower_bound(scenario) - 1e-9
        ),
        terminal_mismatch=tuple(float(v) for v in mismatch),
        objective=float(trajectory.objective),
    )
    return report, dense
