"""Exception types shared across the planner."""


class PlannerError(Exception):
    """Base class for all craneopt failures."""


class RopeLengthError(PlannerError):
    """Rope length must stay strictly positive; the dynamics divide by it."""

    def __init__(self, value):
        super().__init__(f"rope length must be positive, got {value}")
        self.value = value


class ZeroVelocityError(PlannerError):
    """Position-parametrized derivatives are undefined at zero horizontal speed."""

    def __init__(self, value):
        super().__init__(
            f"horizontal payload speed must be positive, got {value}; "
            "use the multiplied-through defect form at rest points"
        )
        self.value = value


class InfeasibleProfileError(PlannerError):
    """The stack profile leaves no admissible payload corridor."""


class InconsistentBoundaryError(PlannerError):
    """Boundary state violates the rope/payload kinematic relation."""


class ScenarioError(PlannerError):
    """Scenario document rejected; `kind` names the failure class.

    Kinds: missing-key, bad-number, length-mismatch, bounds-inverted,
    unknown-key, invalid-value.
    """

    def __init__(self, kind, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
        self.kind = kind
        self.line = line
