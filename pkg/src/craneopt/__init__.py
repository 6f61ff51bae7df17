"""Time-optimal overhead-crane trajectory planning over container stacks.

The planner parametrizes the crane dynamics by the payload's horizontal
position, which turns stack-height clearances into plain per-node bound
constraints of the resulting nonlinear program.  A built-in primal-dual
interior-point solver handles the transcribed problem, and a time-domain
re-simulation certifies the plan between collocation nodes.
"""

from importlib import resources
from pathlib import Path

from .errors import (
    InconsistentBoundaryError,
    InfeasibleProfileError,
    PlannerError,
    RopeLengthError,
    ScenarioError,
    ZeroVelocityError,
)
from .model import (
    Controls,
    CraneParams,
    SpatialState,
    TimeState,
    dynamics_jacobians,
    recover_trolley,
    spatial_dynamics,
    time_dynamics,
)
from .stacks import StackProfile, payload_upper_bound, sample_bounds, stack_height
from .transcription import (
    BoundaryConditions,
    NlpProblem,
    Scenario,
    Trajectory,
    VariableBounds,
    VariableLayout,
    defect,
    extract,
    make_grid,
    pack,
    transcribe,
)
from .solver import KktResiduals, Multipliers, SolveReport, SolverOptions, kkt_check, solve
from .validation import (
    DenseTrajectory,
    ValidationReport,
    analytic_lower_bound,
    check_clearance,
    simulate_time_domain,
    validate_trajectory,
)
from .scenario_io import (
    load_scenario,
    parse_scenario,
    read_trajectory,
    render_scenario,
    write_profile,
    write_report,
    write_trajectory,
)
from .cli import main, plan_scenario

__version__ = "0.1.0"


def reference_scenario_path() -> Path:
    """Filesystem path of the bundled reference scenario."""
    return Path(str(resources.files("craneopt").joinpath("data/paper.scn")))


def load_reference_scenario() -> Scenario:
    return load_scenario(reference_scenario_path())
