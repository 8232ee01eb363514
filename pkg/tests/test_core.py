"""Domain type and quantization contracts."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tiltxter.core import (
    ALL_TILTS,
    TILT_DEGREES,
    BiFrame,
    Finger,
    SensorFrame,
    TiltClass,
    class_of_degrees,
    degrees_of_class,
    dequantize_force,
    flip_left,
    quantize_force,
)


def frame(values, finger=Finger.LEFT):
    return SensorFrame(finger, np.asarray(values, dtype=float))


class TestQuantize:
    def test_zero_maps_to_zero(self):
        assert quantize_force(0.0) == 0

    def test_full_scale(self):
        assert quantize_force(9.0) == 255

    def test_midpoint(self):
        # round(4.5 / 9 * 255) = round(127.5), half-to-even
        assert quantize_force(4.5) == 128

    def test_clamps_out_of_range(self):
        assert quantize_force(-3.0) == 0
        assert quantize_force(25.0) == 255

    def test_roundtrip_on_bytes_is_identity(self):
        q = np.arange(256, dtype=np.uint8)
        assert np.array_equal(quantize_force(dequantize_force(q)), q)

    @given(st.floats(min_value=0.0, max_value=9.0))
    def test_roundtrip_error_within_half_step(self, f):
        err = abs(dequantize_force(quantize_force(f)) - f)
        assert err <= 9.0 / 255.0 / 2.0 + 1e-12


class TestFlipLeft:
    def test_mirrors_a_point(self):
        grid = np.zeros((10, 10))
        grid[2, 0] = 5.0
        flipped = flip_left(frame(grid))
        assert flipped.forces[2, 9] == 5.0
        assert flipped.forces[2, 0] == 0.0

    def test_palindromic_grid_is_fixed_point(self):
        grid = np.tile(np.array([0, 1, 2, 3, 4, 4, 3, 2, 1, 0.0]), (10, 1))
        assert np.array_equal(flip_left(frame(grid)).forces, grid)

    def test_involution(self):
        rng = np.random.default_rng(7)
        grid = rng.uniform(0, 9, (10, 10))
        assert np.array_equal(flip_left(flip_left(frame(grid))).forces, grid)

    def test_preserves_row_multisets(self):
        rng = np.random.default_rng(8)
        grid = rng.uniform(0, 9, (10, 10))
        flipped = flip_left(frame(grid)).forces
        for r in range(10):
            assert np.array_equal(np.sort(flipped[r]), np.sort(grid[r]))

    def test_rejects_right_finger(self):
        with pytest.raises(ValueError):
            flip_left(frame(np.zeros((10, 10)), Finger.RIGHT))


class TestTiltClass:
    def test_zero_is_middle(self):
        assert class_of_degrees(0).index == 4

    def test_minimum(self):
        assert class_of_degrees(-90).index == 0

    def test_forty_five(self):
        assert class_of_degrees(45).index == 6

    def test_bijection(self):
        for idx, deg in enumerate(TILT_DEGREES):
            assert class_of_degrees(deg).index == idx
            assert degrees_of_class(TiltClass(idx)) == deg

    def test_index_order_matches_angle_order(self):
        degs = [c.degrees for c in ALL_TILTS]
        assert degs == sorted(degs)

    def test_unknown_angle_rejected(self):
        with pytest.raises(ValueError):
            class_of_degrees(17)

    def test_out_of_range_index_rejected(self):
        with pytest.raises(ValueError):
            TiltClass(9)


class TestFrames:
    def test_forces_must_be_in_range(self):
        with pytest.raises(ValueError):
            frame(np.full((10, 10), 9.5))

    def test_biframe_checks_finger_tags(self):
        left = frame(np.zeros((10, 10)), Finger.LEFT)
        right = frame(np.zeros((10, 10)), Finger.RIGHT)
        with pytest.raises(ValueError):
            BiFrame(left=right, right=right, gripper_pos=0)
        with pytest.raises(ValueError):
            BiFrame(left=left, right=left, gripper_pos=0)
        with pytest.raises(ValueError):
            BiFrame(left=left, right=right, gripper_pos=31)

    def test_frames_are_immutable(self):
        f = frame(np.zeros((10, 10)))
        with pytest.raises(ValueError):
            f.forces[0, 0] = 1.0

    def test_stacked_channel_order(self):
        left = frame(np.full((10, 10), 2.0), Finger.LEFT)
        right = frame(np.full((10, 10), 3.0), Finger.RIGHT)
        stacked = BiFrame(left=left, right=right, gripper_pos=5).stacked()
        assert stacked.shape == (2, 10, 10)
        assert stacked[0, 0, 0] == 2.0 and stacked[1, 0, 0] == 3.0
