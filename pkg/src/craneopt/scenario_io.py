"""Scenario documents and result serialization.

Scenarios are plain sectioned ``key = value`` text (hand-editable and
diffable).  Lists are comma-separated on one line, ``#`` starts a comment.
The parser tracks line numbers so every rejection names the offending key
and line; that is also why this module does not use :mod:`configparser`.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ScenarioError
from .model import CraneParams, SpatialState
from .solver import SolverOptions
from .stacks import StackProfile, stack_height
from .transcription import BoundaryConditions, Scenario, VariableBounds, make_grid

__all__ = [
    "TRAJECTORY_HEADER",
    "PROFILE_HEADER",
    "parse_scenario",
    "load_scenario",
    "render_scenario",
    "write_trajectory",
    "read_trajectory",
    "write_profile",
    "write_report",
]

TRAJECTORY_HEADER = "x_p,t,v_p,y_p,w_p,l,l_dot,theta,theta_dot,F_t,F_h,s,y_bound"
PROFILE_HEADER = "x_p,s,bound"

_BOUNDARY_KEYS = (
    "t0", "v0", "y0", "w0", "l0", "ld0", "theta0", "thetad0",
    "tf", "vf", "yf", "wf", "lf", "ldf", "thetaf", "thetadf",
)

_SECTION_KEYS = {
    "crane": ("m1", "m2", "g", "h"),
    "path": ("x_start", "x_end"),
    "boundary": _BOUNDARY_KEYS,
    "bounds": ("t_min", "v_min_interior", "y_floor", "l_min", "l_max",
               "theta_max", "Ft_min", "Ft_max", "Fh_min", "Fh_max"),
    "stacks": ("centers", "heights", "width"),
    "solver": ("intervals", "tol", "max_iter", "epsilon_v",
               "barrier_init", "barrier_shrink", "regularization"),
}
_OPTIONAL_SECTION_KEYS = frozenset(_SECTION_KEYS["solver"])


def _scan(text: str):
    """Split the document into {section: {key: (raw value, line number)}}."""
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SECTION_KEYS:
                raise ScenarioError("unknown-key", f"unknown section [{name}]", lineno)
            if name in sections:
                raise ScenarioError("invalid-value", f"duplicate section [{name}]", lineno)
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ScenarioError("invalid-value", f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ScenarioError("invalid-value", f"key outside any section: {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SECTION_KEYS[current]:
            raise ScenarioError("unknown-key", f"unknown key '{key}' in [{current}]", lineno)
        if key in sections[current]:
            raise ScenarioError("invalid-value", f"duplicate key '{key}' in [{current}]", lineno)
        sections[current][key] = (value, lineno)
    return sections


def _need(sections, name):
    if name not in sections:
        raise ScenarioError("missing-key", f"missing section [{name}]")
    return sections[name]


def _float(section, sec_name, key):
    if key not in section:
        raise ScenarioError("missing-key", f"[{sec_name}] is missing key '{key}'")
    raw, lineno = section[key]
    try:
        return float(raw)
    except ValueError:
        raise ScenarioError("bad-number", f"'{key}' is not a number: {raw!r}", lineno) from None


def _int(section, sec_name, key):
    raw, lineno = section[key]
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError("bad-number", f"'{key}' is not an integer: {raw!r}", lineno) from None


def _float_list(section, sec_name, key):
    if key not in section:
        raise ScenarioError("missing-key", f"[{sec_name}] is missing key '{key}'")
    raw, lineno = section[key]
    try:
        return [float(tok) for tok in raw.split(",")]
    except ValueError:
        raise ScenarioError("bad-number", f"'{key}' holds a non-numeric entry: {raw!r}", lineno) from None


def parse_scenario(text: str) -> Scenario:
    """Parse a scenario document; every rejection names key and line."""
    sections = _scan(text)
    for name in _SECTION_KEYS:
        if name != "solver":
            _need(sections, name)

    crane = sections["crane"]
    try:
        params = CraneParams(
            m1=_float(crane, "crane", "m1"), m2=_float(crane, "crane", "m2"),
            g=_float(crane, "crane", "g"), h=_float(crane, "crane", "h"),
        )
    except ValueError as exc:
        raise ScenarioError("invalid-value", f"[crane] {exc}") from None

    path = sections["path"]
    x_start = _float(path, "path", "x_start")
    x_end = _float(path, "path", "x_end")

    bnd = sections["boundary"]
    vals = {key: _float(bnd, "boundary", key) for key in _BOUNDARY_KEYS}
    try:
        boundary = BoundaryConditions(
            initial=SpatialState(vals["t0"], vals["v0"], vals["y0"], vals["w0"],
                                 vals["l0"], vals["ld0"], vals["theta0"], vals["thetad0"]),
            final=SpatialState(vals["tf"], vals["vf"], vals["yf"], vals["wf"],
                               vals["lf"], vals["ldf"], vals["thetaf"], vals["thetadf"]),
        )
    except Exception as exc:
        raise ScenarioError("invalid-value", f"[boundary] {exc}") from None

    bx = sections["bounds"]
    kw = {key: _float(bx, "bounds", key) for key in _SECTION_KEYS["bounds"]}
    for lo, hi in (("l_min", "l_max"), ("Ft_min", "Ft_max"), ("Fh_min", "Fh_max")):
        if kw[lo] > kw[hi]:
            raise ScenarioError(
                "bounds-inverted", f"{lo} = {kw[lo]} exceeds {hi} = {kw[hi]}",
                bx[lo][1],
            )
    if kw["theta_max"] < 0.0:
        raise ScenarioError("bounds-inverted", "theta_max must be nonnegative",
                            bx["theta_max"][1])
    bounds = VariableBounds(**kw)

    st = sections["stacks"]
    centers = _float_list(st, "stacks", "centers")
    heights = _float_list(st, "stacks", "heights")
    if len(centers) != len(heights):
        raise ScenarioError(
            "length-mismatch",
            f"{len(centers)} centers but {len(heights)} heights",
            st["heights"][1],
        )
    try:
        profile = StackProfile(centers=tuple(centers), heights=tuple(heights),
                               width=_float(st, "stacks", "width"))
    except ValueError as exc:
        raise ScenarioError("invalid-value", f"[stacks] {exc}") from None

    sv = sections.get("solver", {})
    intervals = _int(sv, "solver", "intervals") if "intervals" in sv else 100
    epsilon_v = _float(sv, "solver", "epsilon_v") if "epsilon_v" in sv else 1e-2
    opts = {}
    if "tol" in sv:
        opts["tol"] = _float(sv, "solver", "tol")
    if "max_iter" in sv:
        opts["max_iter"] = _int(sv, "solver", "max_iter")
    if "barrier_init" in sv:
        opts["barrier_init"] = _float(sv, "solver", "barrier_init")
    if "barrier_shrink" in sv:
        opts["barrier_shrink"] = _float(sv, "solver", "barrier_shrink")
    if "regularization" in sv:
        opts["regularization"] = _float(sv, "solver", "regularization")
    try:
        solver = SolverOptions(**opts)
        return Scenario(
            params=params, profile=profile, x_p_start=x_start, x_p_end=x_end,
            boundary=boundary, bounds=bounds, intervals=intervals,
            epsilon_v=epsilon_v, solver=solver,
        )
    except ValueError as exc:
        raise ScenarioError("invalid-value", str(exc)) from None


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def render_scenario(scenario: Scenario) -> str:
    """Scenario back to document form; parse(render(s)) == s."""
    p, b = scenario.params, scenario.bounds
    init, final = scenario.boundary.initial, scenario.boundary.final
    sv = scenario.solver
    lines = [
        "[crane]",
        f"m1 = {p.m1!r}", f"m2 = {p.m2!r}", f"g = {p.g!r}", f"h = {p.h!r}",
        "",
        "[path]",
        f"x_start = {scenario.x_p_start!r}", f"x_end = {scenario.x_p_end!r}",
        "",
        "[boundary]",
        f"t0 = {init.t!r}", f"v0 = {init.v_p!r}", f"y0 = {init.y_p!r}",
        f"w0 = {init.w_p!r}", f"l0 = {init.l!r}", f"ld0 = {init.l_dot!r}",
        f"theta0 = {init.theta!r}", f"thetad0 = {init.theta_dot!r}",
        f"tf = {final.t!r}", f"vf = {final.v_p!r}", f"yf = {final.y_p!r}",
        f"wf = {final.w_p!r}", f"lf = {final.l!r}", f"ldf = {final.l_dot!r}",
        f"thetaf = {final.theta!r}", f"thetadf = {final.theta_dot!r}",
        "",
        "[bounds]",
        f"t_min = {b.t_min!r}", f"v_min_interior = {b.v_min_interior!r}",
        f"y_floor = {b.y_floor!r}", f"l_min = {b.l_min!r}", f"l_max = {b.l_max!r}",
        f"theta_max = {b.theta_max!r}", f"Ft_min = {b.Ft_min!r}",
        f"Ft_max = {b.Ft_max!r}", f"Fh_min = {b.Fh_min!r}", f"Fh_max = {b.Fh_max!r}",
        "",
        "[stacks]",
        "centers = " + ", ".join(repr(c) for c in scenario.profile.centers),
        "heights = " + ", ".join(repr(h) for h in scenario.profile.heights),
        f"width = {scenario.profile.width!r}",
        "",
        "[solver]",
        f"intervals = {scenario.intervals}",
        f"tol = {sv.tol!r}",
        f"max_iter = {sv.max_iter}",
        f"epsilon_v = {scenario.epsilon_v!r}",
        f"barrier_init = {sv.barrier_init!r}",
        f"barrier_shrink = {sv.barrier_shrink!r}",
        f"regularization = {sv.regularization!r}",
        "",
    ]
    return "\n".join(lines)


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def trajectory_csv(trajectory, validation=None) -> str:
    """Render the node table; the header and column order are frozen."""
    n_int = len(trajectory.controls)
    lines = [TRAJECTORY_HEADER]
    for k, (x_p, state) in enumerate(trajectory.nodes):
        ctrl = trajectory.controls[min(k, n_int - 1)]
        s_k, bound_k = trajectory.bound_trace[k]
        cells = (
            x_p, state.t, state.v_p, state.y_p, state.w_p,
            state.l, state.l_dot, state.theta, state.theta_dot,
            ctrl.F_t, ctrl.F_h, s_k, bound_k,
        )
        lines.append(",".join(_fmt(v) for v in cells))
    return "\n".join(lines) + "\n"


def write_trajectory(trajectory, destination, validation=None) -> None:
    """Write the node CSV; ``validation`` is accepted for interface parity
    but the frozen column set carries node data only."""
    Path(destination).write_text(trajectory_csv(trajectory, validation), encoding="utf-8")


def read_trajectory(source):
    """Load a trajectory CSV produced by :func:`write_trajectory`."""
    from .model import Controls, SpatialState
    from .transcription import Trajectory

    text = Path(source).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != TRAJECTORY_HEADER:
        raise ValueError(f"unrecognized trajectory header: {lines[0] if lines else ''!r}")
    nodes, controls, trace = [], [], []
    for ln in lines[1:]:
        vals = [float(tok) for tok in ln.split(",")]
        if len(vals) != 13:
            raise ValueError(f"expected 13 columns, got {len(vals)}")
        nodes.append((vals[0], SpatialState(*vals[1:9])))
        controls.append(Controls(vals[9], vals[10]))
        trace.append((vals[11], vals[12]))
    return Trajectory(
        nodes=tuple(nodes),
        controls=tuple(controls[:-1]),
        objective=nodes[-1][1].t,
        bound_trace=tuple(trace),
    )


def write_profile(scenario: Scenario, destination, samples: int = 1000) -> None:
    """Sampled height field and payload bound along the traverse."""
    xs = np.linspace(scenario.x_p_start, scenario.x_p_end, samples)
    s = stack_height(scenario.profile, xs)
    bound = scenario.params.h - s
    lines = [PROFILE_HEADER]
    lines += [f"{_fmt(x)},{_fmt(si)},{_fmt(bi)}" for x, si, bi in zip(xs, s, bound)]
    Path(destination).write_text("\n".join(lines) + "\n", encoding="utf-8")


def report_document(solve_report, validation_report=None, problem=None,
                    scenario: Scenario | None = None) -> dict:
    """Frozen report schema combining solver and validation outcomes."""
    doc = {
        "solver": {
            "status": solve_report.status,
            "objective": solve_report.objective,
            "kkt_residual": solve_report.kkt_residual,
            "iterations": solve_report.iterations,
            "wall_time": solve_report.wall_time,
        },
        "validation": validation_report.as_dict() if validation_report else None,
        "problem": None,
    }
    if problem is not None:
        doc["problem"] = {
            "intervals": scenario.intervals if scenario else None,
            "n_vars": problem.n_vars,
            "n_eq": problem.n_eq,
        }
    return doc


def write_report(destination, solve_report, validation_report=None, problem=None,
                 scenario: Scenario | None = None) -> None:
    doc = report_document(solve_report, validation_report, problem, scenario)
    Path(destination).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
