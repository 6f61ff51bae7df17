"""Command-line driver: plan, validate, profile and check subcommands.

Exit status contract: 0 on success, 1 when a scenario is infeasible or a
solve does not converge (or validation budgets are exceeded for
``validate``), 2 on I/O, usage or parse errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .errors import (
    InconsistentBoundaryError,
    InfeasibleProfileError,
    PlannerError,
    ScenarioError,
)
from .scenario_io import (
    load_scenario,
    read_trajectory,
    write_profile,
    write_report,
    write_trajectory,
)
from .solver import solve
from .stacks import sample_bounds
from .transcription import Scenario, extract, make_grid, transcribe
from .validation import CLEARANCE_BUDGET, TERMINAL_BUDGET, validate_trajectory

__all__ = ["main", "plan_scenario"]


def plan_scenario(scenario: Scenario, options=None):
    """Transcribe and solve one scenario.

    Returns ``(trajectory, solve_report, problem)``; the trajectory is
    ``None`` unless the solver converged.
    """
    problem = transcribe(scenario)
    x, report = solve(problem, options or scenario.solver)
    trajectory = extract(scenario, x) if report.status == "converged" else None
    return trajectory, report, problem


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    updates = {}
    if getattr(args, "intervals", None) is not None:
        updates["intervals"] = args.intervals
    if getattr(args, "tol", None) is not None:
        updates["solver"] = dataclasses.replace(scenario.solver, tol=args.tol)
    return dataclasses.replace(scenario, **updates) if updates else scenario


def _cmd_plan(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    trajectory, report, problem = plan_scenario(scenario)
    if trajectory is None:
        print(f"solve failed: {report.status} after {report.iterations} iterations "
              f"({report.message})", file=sys.stderr)
        if args.report:
            write_report(args.report, report, problem=problem, scenario=scenario)
        return 1
    validation, _ = validate_trajectory(trajectory, scenario)
    write_trajectory(trajectory, args.output, validation)
    if args.report:
        write_report(args.report, report, validation, problem, scenario)
    print(f"converged: T = {trajectory.objective:.6f} s in {report.iterations} "
          f"iterations (KKT residual {report.kkt_residual:.2e})")
    print(f"validation: terminal error {validation.terminal_error:.2e}, "
          f"clearance violation {validation.max_clearance_violation:.2e}, "
          f"sway peak {validation.sway_peak:.4f} rad")
    return 0


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    trajectory = read_trajectory(args.trajectory)
    report, _ = validate_trajectory(trajectory, scenario)
    for key, value in report.as_dict().items():
        print(f"{key}: {value}")
    ok = report.within_budget(CLEARANCE_BUDGET, TERMINAL_BUDGET)
    print("result: " + ("PASS" if ok else "FAIL"))
    return 0 if ok else 1


def _cmd_profile(args) -> int:
    scenario = load_scenario(args.scenario)
    write_profile(scenario, args.output)
    return 0


def _cmd_check(args) -> int:
    scenario = load_scenario(args.scenario)
    grid = make_grid(scenario)
    table = sample_bounds(scenario.profile, scenario.params, grid)
    floor = scenario.bounds.y_floor
    problems = []
    closed = table[:, 1] < floor
    if closed.any():
        k = int(closed.argmax())
        problems.append(f"corridor closes at x_p={grid[k]:g} "
                        f"(bound {table[k, 1]:g} m < floor {floor:g} m)")
    for name, node, st in (("initial", 0, scenario.boundary.initial),
                           ("final", len(grid) - 1, scenario.boundary.final)):
        if st.y_p > table[node, 1]:
            problems.append(f"{name} payload offset {st.y_p:g} exceeds bound "
                            f"{table[node, 1]:g}")
    if problems:
        for line in problems:
            print(f"infeasible: {line}")
        return 1
    print(f"feasible: {len(grid)} nodes checked, tightest corridor "
          f"{table[:, 1].min():g} m")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="craneopt",
        description="Time-optimal crane trajectory planning over container stacks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan a trajectory and write the node CSV")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", required=True, help="trajectory CSV path")
    p.add_argument("--report", help="also write a JSON solve/validation report")
    p.add_argument("--intervals", type=int, help="override the grid interval count")
    p.add_argument("--tol", type=float, help="override the solver tolerance")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("validate", help="re-simulate a planned trajectory")
    p.add_argument("scenario")
    p.add_argument("trajectory")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("profile", help="export the sampled stack profile")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", required=True, help="profile CSV path")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("check", help="run feasibility pre-checks only")
    p.add_argument("scenario")
    p.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (InfeasibleProfileError, InconsistentBoundaryError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, PlannerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
