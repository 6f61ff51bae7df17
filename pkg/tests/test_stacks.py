"""Height-field semantics: closed footprints, pointwise max, sampled bounds."""

import numpy as np
import pytest

from craneopt import (
    CraneParams,
    InfeasibleProfileError,
    StackProfile,
    payload_upper_bound,
    sample_bounds,
    stack_height,
)

P = CraneParams(m1=1.2, m2=0.6, g=9.81, h=4.5)

REFERENCE = StackProfile(
    centers=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
    heights=(0.5, 1.0, 1.0, 1.0, 2.0, 2.0, 2.4, 2.5, 1.0),
    width=0.08,
)


class TestStackHeight:
    def test_reference_center_value(self):
        assert stack_height(REFERENCE, 0.5) == pytest.approx(2.0)

    def test_outside_all_footprints(self):
        assert stack_height(REFERENCE, 0.05) == 0.0

    def test_closed_left_edge(self):
        # footprint of the 0.7 stack starts at 0.66 and the edge counts
        assert stack_height(REFERENCE, 0.66) == pytest.approx(2.4)

    def test_closed_right_edge(self):
        assert stack_height(REFERENCE, 0.74) == pytest.approx(2.4)

    def test_vectorized_matches_scalar(self):
        xs = np.linspace(-0.1, 1.1, 241)
        vec = stack_height(REFERENCE, xs)
        scal = np.array([stack_height(REFERENCE, float(x)) for x in xs])
        np.testing.assert_array_equal(vec, scal)

    def test_range_bounded_by_tallest_stack(self):
        rng = np.random.default_rng(3)
        xs = rng.uniform(-1.0, 2.0, 500)
        s = stack_height(REFERENCE, xs)
        assert np.all(s >= 0.0)
        assert np.all(s <= max(REFERENCE.heights))

    def test_overlapping_footprints_take_the_max(self):
        profile = StackProfile(centers=(0.5, 0.55), heights=(1.0, 2.0), width=0.2)
        assert stack_height(profile, 0.52) == pytest.approx(2.0)
        assert stack_height(profile, 0.42) == pytest.approx(1.0)

    def test_reference_occupancy_is_nine_disjoint_footprints(self):
        # 10 cm spacing vs 8 cm width: no overlap, total covered length 0.72
        xs = np.linspace(0.0, 1.0, 100001)
        s = stack_height(REFERENCE, xs)
        occupied = s > 0.0
        runs = np.diff(occupied.astype(int))
        assert (runs == 1).sum() == 9
        assert (runs == -1).sum() == 9
        covered = occupied.mean() * 1.0
        assert covered == pytest.approx(9 * 0.08, abs=2e-4)


class TestPayloadUpperBound:
    def test_over_tallest_stack(self):
        assert payload_upper_bound(REFERENCE, P, 0.8) == pytest.approx(2.0)

    def test_clear_ground(self):
        assert payload_upper_bound(REFERENCE, P, 0.05) == pytest.approx(4.5)

    def test_mid_profile(self):
        assert payload_upper_bound(REFERENCE, P, 0.5) == pytest.approx(2.5)

    def test_stack_above_trolley_is_rejected(self):
        tall = StackProfile(centers=(0.3,), heights=(4.6,), width=0.08)
        with pytest.raises(InfeasibleProfileError, match="stack 1"):
            payload_upper_bound(tall, P, 0.3)


class TestSampleBounds:
    def test_single_stack_grid(self):
        profile = StackProfile(centers=(0.5,), heights=(2.0,), width=0.08)
        table = sample_bounds(profile, P, [0.45, 0.48, 0.5])
        np.testing.assert_allclose(table[:, 1], [4.5, 2.5, 2.5])

    def test_empty_profile_gives_constant_ceiling(self):
        profile = StackProfile(centers=(), heights=(), width=0.08)
        table = sample_bounds(profile, P, np.linspace(0, 1, 11))
        np.testing.assert_array_equal(table[:, 1], np.full(11, 4.5))

    def test_reference_grid_lowers_bounds_inside_footprints(self):
        grid = np.arange(101) * 0.01
        table = sample_bounds(REFERENCE, P, grid)
        assert table.shape == (101, 2)
        s = stack_height(REFERENCE, grid)
        lowered = table[:, 1] < 4.5
        np.testing.assert_array_equal(lowered, s > 0)
        assert lowered.sum() > 0

    def test_matches_pointwise_evaluation(self):
        rng = np.random.default_rng(11)
        grid = np.sort(rng.uniform(0.0, 1.0, 40))
        table = sample_bounds(REFERENCE, P, grid)
        pointwise = np.array([payload_upper_bound(REFERENCE, P, float(x)) for x in grid])
        np.testing.assert_array_equal(table[:, 1], pointwise)

    def test_unsorted_grid_rejected(self):
        with pytest.raises(ValueError, match="ascending"):
            sample_bounds(REFERENCE, P, [0.5, 0.4])

    def test_infeasible_profile_propagates(self):
        tall = StackProfile(centers=(0.3,), heights=(5.0,), width=0.08)
        with pytest.raises(InfeasibleProfileError):
            sample_bounds(tall, P, [0.0, 0.5])


class TestProfileConstruction:
    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="centers"):
            StackProfile(centers=(0.1, 0.2), heights=(1.0,), width=0.08)

    def test_nonincreasing_centers(self):
        with pytest.raises(ValueError, match="increasing"):
            StackProfile(centers=(0.2, 0.1), heights=(1.0, 1.0), width=0.08)

    def test_bad_width(self):
        with pytest.raises(ValueError, match="width"):
            StackProfile(centers=(0.1,), heights=(1.0,), width=0.0)
