"""Container-stack height profile along the traverse axis.

The profile is a piecewise-constant height field: each stack occupies a
closed footprint of common width centered on its position, and overlapping
footprints resolve to the taller stack.  The planner consumes nothing but
sampled values of the payload corridor ``h - s(x_p)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProfileError
from .model import CraneParams

__all__ = ["StackProfile", "stack_height", "payload_upper_bound", "sample_bounds"]


@dataclass(frozen=True)
class StackProfile:
    """Stack center positions, heights and the common footprint width."""

    centers: tuple
    heights: tuple
    width: float

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        object.__setattr__(self, "heights", tuple(float(r) for r in self.heights))
        if len(self.centers) != len(self.heights):
            raise ValueError(
                f"{len(self.centers)} centers vs {len(self.heights)} heights"
            )
        if not self.width > 0.0:
            raise ValueError(f"stack width must be positive, got {self.width}")
        if any(r < 0.0 for r in self.heights):
            raise ValueError("stack heights must be nonnegative")
        if any(b <= a for a, b in zip(self.centers, self.centers[1:])):
            raise ValueError("stack centers must be strictly increasing")

    @property
    def footprints(self):
        """Closed intervals (lo, hi) covered by each stack."""
        half = 0.5 * self.width
        return tuple((c - half, c + half) for c in self.centers)

    def max_height(self) -> float:
        return max(self.heights, default=0.0)


def stack_height(profile: StackProfile, x_p):
    """Height field s(x_p): tallest stack whose footprint contains the point.

    Accepts a scalar or an array of positions; points outside every footprint
    evaluate to zero.
    """
    x = np.asarray(x_p, dtype=float)
    s = np.zeros_like(x)
    for (lo, hi), rho in zip(profile.footprints, profile.heights):
        np.maximum(s, np.where((x >= lo) & (x <= hi), rho, 0.0), out=s)
    return float(s) if s.ndim == 0 else s


def payload_upper_bound(profile: StackProfile, params: CraneParams, x_p):
    """Upper bound on the payload offset: trolley height minus stack height."""
    for i, rho in enumerate(profile.heights):
        if rho > params.h:
            raise InfeasibleProfileError(
                f"stack {i + 1} at x={profile.centers[i]} is {rho} m tall, "
                f"above the trolley height {params.h} m"
            )
    return params.h - stack_height(profile, x_p)


def sample_bounds(profile: StackProfile, params: CraneParams, grid):
    """Payload bound sampled on an ascending grid.

    Returns an array of ``(x_p, h - s(x_p))`` rows; this sampled table is the
    only stack information the transcription ever sees.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0.0):
        raise ValueError("grid positions must be sorted ascending")
    return np.column_stack([grid, payload_upper_bound(profile, params, grid)])
