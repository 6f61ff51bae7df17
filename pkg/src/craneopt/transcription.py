"""Direct collocation of the planning problem on a uniform position grid.

States live on ``N + 1`` grid nodes, controls are constant on each of the
``N`` intervals, and each interval contributes eight multiplied-through
trapezoidal defect residuals

    r_j = vbar * (x_j[k+1] - x_j[k]) - dx * (f_j[k] + f_j[k+1]) / 2

with ``vbar`` the mean horizontal speed of the interval and ``f`` the
time-form right-hand side (``f = 1`` for the elapsed-time component).  The
form never divides by the speed, so rest endpoints are representable.

Stack heights enter purely as per-node upper bounds on the payload offset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from . import model
from .errors import InconsistentBoundaryError, InfeasibleProfileError, RopeLengthError
from .model import Controls, CraneParams, SpatialState
from .solver import SolverOptions
from .stacks import StackProfile, sample_bounds

__all__ = [
    "VariableBounds",
    "BoundaryConditions",
    "Scenario",
    "VariableLayout",
    "NlpProblem",
    "Trajectory",
    "make_grid",
    "defect",
    "transcribe",
    "extract",
    "pack",
]

N_STATES = 8
N_CONTROLS = 2
# per-interval unknowns affecting its defects: left node, right node, controls
_BLOCK = 2 * N_STATES + N_CONTROLS
# seed order (left states, right states, controls) -> column offset from 10k
_COL_OFFSET = np.array(list(range(8)) + list(range(10, 18)) + [8, 9])
_COL_SORT = np.argsort(_COL_OFFSET)

_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class VariableBounds:
    """Box bounds shared by every node (the payload ceiling comes per node)."""

    t_min: float = 0.0
    v_min_interior: float = 0.0
    y_floor: float = 0.15
    l_min: float = 0.0
    l_max: float = 4.5
    theta_max: float = 0.1
    Ft_min: float = -1.0
    Ft_max: float = 1.0
    Fh_min: float = 0.0
    Fh_max: float = 8.0

    def __post_init__(self):
        for lo, hi in (("l_min", "l_max"), ("Ft_min", "Ft_max"), ("Fh_min", "Fh_max")):
            if getattr(self, lo) > getattr(self, hi):
                raise ValueError(f"{lo} exceeds {hi}")
        if self.theta_max < 0.0:
            raise ValueError("theta_max must be nonnegative")


@dataclass(frozen=True)
class BoundaryConditions:
    """Initial and final node states.

    All eight initial components are pinned; the final elapsed time is the
    quantity being minimized, so only the remaining seven final components
    are pinned.
    """

    initial: SpatialState
    final: SpatialState


@dataclass(frozen=True)
class Scenario:
    """Everything needed to plan one traverse."""

    params: CraneParams
    profile: StackProfile
    x_p_start: float
    x_p_end: float
    boundary: BoundaryConditions
    bounds: VariableBounds
    intervals: int = 100
    epsilon_v: float = 1e-2
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if not self.x_p_end > self.x_p_start:
            raise ValueError("x_p_end must exceed x_p_start")
        if self.intervals < 2:
            raise ValueError("at least 2 intervals are required")
        if not self.epsilon_v > 0.0:
            raise ValueError("epsilon_v must be positive")
        b = self.bounds
        for end, st in (("initial", self.boundary.initial), ("final", self.boundary.final)):
            if st.t < b.t_min:
                raise ValueError(f"{end} time below t_min")
            if st.v_p < 0.0:
                raise ValueError(f"{end} speed negative")
            if not b.y_floor <= st.y_p <= self.params.h:
                raise ValueError(f"{end} payload offset outside [y_floor, h]")
            if not b.l_min <= st.l <= b.l_max:
                raise ValueError(f"{end} rope length outside [l_min, l_max]")
            if abs(st.theta) > b.theta_max:
                raise ValueError(f"{end} sway angle outside +-theta_max")

    @property
    def distance(self) -> float:
        return self.x_p_end - self.x_p_start

    def interior_v_min(self) -> float:
        """Speed floor applied at interior nodes."""
        return max(self.bounds.v_min_interior, self.epsilon_v)


@dataclass(frozen=True)
class VariableLayout:
    """Node-major interleaved decision vector: [x_0, u_0, x_1, u_1, ..., x_N].

    The interleaving keeps every defect's footprint contiguous, which makes
    the constraint Jacobian block bidiagonal.
    """

    intervals: int

    @property
    def n_vars(self) -> int:
        return (self.intervals + 1) * N_STATES + self.intervals * N_CONTROLS

    def state_index(self, node: int, component: int) -> int:
        return node * (N_STATES + N_CONTROLS) + component

    def control_index(self, interval: int, component: int) -> int:
        return interval * (N_STATES + N_CONTROLS) + N_STATES + component

    def pack(self, states, controls) -> np.ndarray:
        n = self.intervals
        z = np.empty(self.n_vars)
        block = z[: n * (N_STATES + N_CONTROLS)].reshape(n, N_STATES + N_CONTROLS)
        block[:, :N_STATES] = states[:n]
        block[:, N_STATES:] = controls
        z[n * (N_STATES + N_CONTROLS):] = states[n]
        return z

    def unpack(self, z):
        n = self.intervals
        if z.shape != (self.n_vars,):
            raise ValueError(f"expected solution vector of length {self.n_vars}, got {z.shape}")
        block = z[: n * (N_STATES + N_CONTROLS)].reshape(n, N_STATES + N_CONTROLS)
        states = np.vstack([block[:, :N_STATES], z[None, n * (N_STATES + N_CONTROLS):]])
        return states, block[:, N_STATES:].copy()


@dataclass
class NlpProblem:
    """Bound- and equality-constrained NLP produced by :func:`transcribe`."""

    n_vars: int
    n_eq: int
    lb: np.ndarray
    ub: np.ndarray
    x0: np.ndarray
    objective: object
    gradient: object
    constraints: object
    jacobian: object
    hessian: object
    layout: VariableLayout | None = None


@dataclass(frozen=True)
class Trajectory:
    """Planner output: node states, interval controls and the bound trace."""

    nodes: tuple          # (x_p, SpatialState) per node
    controls: tuple       # Controls per interval
    objective: float      # total traverse time, seconds
    bound_trace: tuple    # (stack height, payload bound) per node

    @property
    def times(self):
        return np.array([s.t for _, s in self.nodes])

    @property
    def positions(self):
        return np.array([x for x, _ in self.nodes])

    def state_array(self):
        return np.vstack([s.as_array() for _, s in self.nodes])

    def control_array(self):
        return np.array([[c.F_t, c.F_h] for c in self.controls])


def make_grid(scenario: Scenario) -> np.ndarray:
    """Uniform node positions start + k * (end - start) / N."""
    n = scenario.intervals
    step = (scenario.x_p_end - scenario.x_p_start) / n
    return scenario.x_p_start + step * np.arange(n + 1)


def _defect_rows(a, b, u, dx, p: CraneParams):
    """Eight residuals for one interval; inputs may be floats, arrays or duals."""
    vbar = 0.5 * (a[1] + b[1])
    fa = model.common_rates(a[1], a[3], a[4], a[5], a[6], a[7], u[0], u[1], p.m1, p.m2, p.g)
    fb = model.common_rates(b[1], b[3], b[4], b[5], b[6], b[7], u[0], u[1], p.m1, p.m2, p.g)
    rows = [vbar * (b[0] - a[0]) - dx]
    half_dx = 0.5 * dx
    for j in range(1, N_STATES):
        rows.append(vbar * (b[j] - a[j]) - half_dx * (fa[j - 1] + fb[j - 1]))
    return rows


def defect(state_k: SpatialState, state_k1: SpatialState, control: Controls,
           dx: float, params: CraneParams) -> np.ndarray:
    """Collocation residuals for a single interval of width ``dx``."""
    for st in (state_k, state_k1):
        if not st.l > 0.0:
            raise RopeLengthError(st.l)
    rows = _defect_rows(
        state_k.as_array(), state_k1.as_array(),
        (control.F_t, control.F_h), dx, params,
    )
    return np.array(rows, dtype=float)


def _boundary_targets(scenario: Scenario):
    """(variable index, pinned value) pairs: 8 initial states, 7 final."""
    layout = VariableLayout(scenario.intervals)
    init = scenario.boundary.initial.as_array()
    final = scenario.boundary.final.as_array()
    pins = [(layout.state_index(0, j), init[j]) for j in range(N_STATES)]
    pins += [(layout.state_index(scenario.intervals, j), final[j]) for j in range(1, N_STATES)]
    return pins


def _check_boundary_consistency(scenario: Scenario):
    for end, st in (("initial", scenario.boundary.initial), ("final", scenario.boundary.final)):
        expected = st.l * np.cos(st.theta)
        if abs(st.y_p - expected) > _BOUNDARY_TOL:
            raise InconsistentBoundaryError(
                f"{end} payload offset {st.y_p} does not match "
                f"l*cos(theta) = {expected}"
            )


def _initial_guess(scenario: Scenario, grid, layout: VariableLayout) -> np.ndarray:
    n = scenario.intervals
    init = scenario.boundary.initial.as_array()
    final = scenario.boundary.final.as_array()
    frac = np.linspace(0.0, 1.0, n + 1)[:, None]
    states = (1.0 - frac) * init[None, :] + frac * final[None, :]
    v_guess = 0.2
    states[1:-1, 1] = v_guess
    states[:, 0] = (grid - grid[0]) / v_guess
    controls = np.tile([0.0, scenario.params.m2 * scenario.params.g], (n, 1))
    return layout.pack(states, controls)


def transcribe(scenario: Scenario) -> NlpProblem:
    """Build the sparse NLP: final-time objective, defects, pins, node bounds."""
    n = scenario.intervals
    p = scenario.params
    layout = VariableLayout(n)
    grid = make_grid(scenario)
    dx = (scenario.x_p_end - scenario.x_p_start) / n

    bound_table = sample_bounds(scenario.profile, p, grid)
    y_caps = bound_table[:, 1]
    floor = scenario.bounds.y_floor
    bad = np.nonzero(y_caps < floor)[0]
    if bad.size:
        k = int(bad[0])
        raise InfeasibleProfileError(
            f"payload corridor closes at x_p={grid[k]:g}: bound {y_caps[k]:g} m "
            f"is below the floor {floor:g} m"
        )
    for node, st in ((0, scenario.boundary.initial), (n, scenario.boundary.final)):
        if st.y_p > y_caps[node]:
            raise InfeasibleProfileError(
                f"pinned payload offset {st.y_p:g} at node {node} exceeds "
                f"the stack bound {y_caps[node]:g}"
            )
    _check_boundary_consistency(scenario)

    b = scenario.bounds
    n_vars = layout.n_vars
    lb = np.full(n_vars, -np.inf)
    ub = np.full(n_vars, np.inf)
    v_floor_interior = scenario.interior_v_min()
    for k in range(n + 1):
        idx = layout.state_index(k, 0)
        lb[idx] = b.t_min                                   # t
        lb[idx + 1] = 0.0 if k in (0, n) else v_floor_interior  # v_p
        lb[idx + 2], ub[idx + 2] = floor, y_caps[k]         # y_p
        lb[idx + 4], ub[idx + 4] = b.l_min, b.l_max         # l
        lb[idx + 6], ub[idx + 6] = -b.theta_max, b.theta_max  # theta
    for k in range(n):
        iu = layout.control_index(k, 0)
        lb[iu], ub[iu] = b.Ft_min, b.Ft_max
        lb[iu + 1], ub[iu + 1] = b.Fh_min, b.Fh_max

    pins = _boundary_targets(scenario)
    n_defect = N_STATES * n
    n_eq = n_defect + len(pins)
    pin_idx = np.array([i for i, _ in pins])
    pin_val = np.array([v for _, v in pins])

    obj_index = layout.state_index(n, 0)

    # static sparsity: defect rows carry one dense 8x18 block per interval
    stride = N_STATES + N_CONTROLS
    block_cols = (np.arange(n)[:, None] * stride + np.sort(_COL_OFFSET)[None, :])
    jac_indices = np.concatenate([
        np.repeat(block_cols, N_STATES, axis=0).ravel(),
        pin_idx,
    ])
    jac_indptr = np.concatenate([
        np.arange(n_defect + 1) * _BLOCK,
        n_defect * _BLOCK + 1 + np.arange(len(pins)),
    ])
    base = np.arange(n) * stride
    hess_rows = (base[None, :] + _COL_OFFSET[:, None])          # (18, n)
    hess_rows = np.repeat(hess_rows[:, None, :], _BLOCK, axis=1)  # (18, 18, n)
    hess_cols = np.swapaxes(hess_rows, 0, 1)

    def _split(z):
        states, controls = layout.unpack(z)
        left = [states[:-1, j] for j in range(N_STATES)]
        right = [states[1:, j] for j in range(N_STATES)]
        return states, controls, left, right

    def objective(z):
        return float(z[obj_index])

    def gradient(z):
        g = np.zeros(n_vars)
        g[obj_index] = 1.0
        return g

    def constraints(z):
        _, controls, left, right = _split(z)
        with np.errstate(all="ignore"):
            rows = _defect_rows(left, right, (controls[:, 0], controls[:, 1]), dx, p)
        out = np.empty(n_eq)
        out[:n_defect] = np.stack(rows).T.ravel()
        out[n_defect:] = z[pin_idx] - pin_val
        return out

    def jacobian(z):
        _, controls, left, right = _split(z)
        seeds = ad.seed([*left, *right, controls[:, 0], controls[:, 1]])
        with np.errstate(all="ignore"):
            rows = _defect_rows(seeds[:8], seeds[8:16], seeds[16:], dx, p)
        block = np.stack([r.der for r in rows])       # (8, 18, n)
        block = block[:, _COL_SORT, :]                # columns ascending
        data = np.concatenate([
            block.transpose(2, 0, 1).ravel(),
            np.ones(len(pins)),
        ])
        return sp.csr_matrix((data, jac_indices, jac_indptr), shape=(n_eq, n_vars))

    def hessian(z, lam):
        _, controls, left, right = _split(z)
        seeds = ad.seed2([*left, *right, controls[:, 0], controls[:, 1]])
        with np.errstate(all="ignore"):
            rows = _defect_rows(seeds[:8], seeds[8:16], seeds[16:], dx, p)
        hstack = np.stack([r.hes for r in rows])      # (8, 18, 18, n)
        lam_defect = lam[:n_defect].reshape(n, N_STATES)
        hloc = np.einsum("jpqn,nj->pqn", hstack, lam_defect)
        return sp.coo_matrix(
            (hloc.ravel(), (hess_rows.ravel(), hess_cols.ravel())),
            shape=(n_vars, n_vars),
        ).tocsr()

    return NlpProblem(
        n_vars=n_vars,
        n_eq=n_eq,
        lb=lb,
        ub=ub,
        x0=_initial_guess(scenario, grid, layout),
        objective=objective,
        gradient=gradient,
        constraints=constraints,
        jacobian=jacobian,
        hessian=hessian,
        layout=layout,
    )


def extract(scenario: Scenario, z) -> Trajectory:
    """Unpack a solution vector into a :class:`Trajectory`."""
    z = np.asarray(z, dtype=float)
    layout = VariableLayout(scenario.intervals)
    states, controls = layout.unpack(z)
    grid = make_grid(scenario)
    bound_table = sample_bounds(scenario.profile, scenario.params, grid)
    nodes = tuple(
        (float(x), SpatialState.from_array(row)) for x, row in zip(grid, states)
    )
    ctrl = tuple(Controls(float(a), float(b)) for a, b in controls)
    trace = tuple(
        (float(scenario.params.h - cap), float(cap)) for cap in bound_table[:, 1]
    )
    return Trajectory(
        nodes=nodes,
        controls=ctrl,
        objective=float(states[-1, 0]),
        bound_trace=trace,
    )


def pack(scenario: Scenario, trajectory: Trajectory) -> np.ndarray:
    """Inverse of :func:`extract`: rebuild the decision vector."""
    layout = VariableLayout(scenario.intervals)
    return layout.pack(trajectory.state_array(), trajectory.control_array())
