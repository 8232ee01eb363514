"""Remote/local node ticks: slewing, rendering stages, latency records."""

import numpy as np
import pytest

from tiltxter.core import FeedbackMode, class_of_degrees
from tiltxter.nodes import (
    LocalNode,
    RemoteConfig,
    RemoteNode,
    bench_local_tick,
    snap_to_class,
    wrap_orientation,
)
from tiltxter.render import render_feedback
from tiltxter.wire import NO_PREDICTION, Command, decode_msg, encode_msg


class TestAngles:
    def test_wrap_into_half_open_range(self):
        assert wrap_orientation(0) == 0
        assert wrap_orientation(90) == -90
        assert wrap_orientation(-90) == -90
        assert wrap_orientation(180) == 0
        assert wrap_orientation(135) == -45
        assert wrap_orientation(-135) == 45

    def test_snap_exact_classes(self):
        for deg in (-60, -45, -30, 0, 30, 45, 60):
            assert snap_to_class(deg) == class_of_degrees(deg)
        assert snap_to_class(90).degrees in (-90, 90)

    def test_snap_nearest(self):
        assert snap_to_class(10) == class_of_degrees(0)
        assert snap_to_class(38) == class_of_degrees(45)
        assert snap_to_class(-70) == class_of_degrees(-60)
        assert snap_to_class(170) == class_of_degrees(0)  # wraps first


class TestRemoteNode:
    def test_initial_state_renders_holder_angle(self):
        node = RemoteNode(RemoteConfig(holder_tilt_deg=30, seed=1))
        pair = node.tick()
        assert pair.seq == 1
        assert pair.gripper_pos == node.cfg.initial_gripper
        assert node.relative_deg == pytest.approx(30.0)

    def test_command_at_current_target_is_fixed_point(self):
        node = RemoteNode(RemoteConfig(holder_tilt_deg=0, seed=1))
        before = node.orientation
        node.tick(Command(seq=1, t_us=0, target_tilt_deg=0, gripper_pos=15, mode=0))
        assert node.orientation == before

    def test_slew_rate_90_deg_per_second(self):
        node = RemoteNode(RemoteConfig(holder_tilt_deg=0, seed=1))
        cmd = Command(seq=1, t_us=0, target_tilt_deg=90, gripper_pos=15, mode=0)
        node.tick(cmd)
        for _ in range(58):
            node.tick()
        assert node.orientation < 90.0  # 59 ticks: not there yet
        node.tick()
        assert node.orientation == pytest.approx(90.0)  # 60 ticks = 1.0 s

    def test_gripper_applied_immediately(self):
        node = RemoteNode(RemoteConfig(holder_tilt_deg=0, seed=1))
        pair = node.tick(Command(seq=1, t_us=0, target_tilt_deg=0, gripper_pos=30, mode=0))
        assert pair.gripper_pos == 30

    def test_grasp_judgement_uses_wrapped_angle(self):
        node = RemoteNode(RemoteConfig(holder_tilt_deg=90, seed=1))
        node.orientation = -90.0  # opposite end: same line orientation
        ack = node.judge_grasp(Command(seq=2, t_us=0, target_tilt_deg=-90, gripper_pos=15,
                                       mode=0, flags=1))
        assert ack.success
        assert ack.relative_centideg == 0

    def test_grasp_fails_out_of_tolerance(self):
        node = RemoteNode(RemoteConfig(holder_tilt_deg=60, seed=1))
        ack = node.judge_grasp(Command(seq=1, t_us=0, target_tilt_deg=0, gripper_pos=15,
                                       mode=0, flags=1))
        assert not ack.success
        assert ack.relative_centideg == 6000

    def test_sensor_pairs_deterministic_per_seed(self):
        a = RemoteNode(RemoteConfig(holder_tilt_deg=45, seed=9))
        b = RemoteNode(RemoteConfig(holder_tilt_deg=45, seed=9))
        for _ in range(5):
            assert a.tick() == b.tick()

    def test_seq_strictly_increasing(self):
        node = RemoteNode(RemoteConfig(seed=0))
        seqs = [node.tick().seq for _ in range(10)]
        assert seqs == sorted(set(seqs))


class TestLocalNode:
    def _pair(self, seed=0, deg=0, gripper=30):
        remote = RemoteNode(RemoteConfig(holder_tilt_deg=deg, seed=seed,
                                         initial_gripper=gripper))
        return remote.tick()

    def test_none_mode_always_dark(self):
        node = LocalNode(FeedbackMode.NONE)
        for _ in range(3):
            out = node.tick(self._pair())
            assert out.left == bytes(20) and out.right == bytes(20)
            assert out.predicted == NO_PREDICTION

    def test_seq_mirrors_input(self):
        node = LocalNode(FeedbackMode.DOWNSIZED)
        pair = self._pair()
        assert node.tick(pair).seq == pair.seq

    def test_missing_model_fault(self):
        node = LocalNode(FeedbackMode.CNN_PATTERN, model=None)
        out = node.tick(self._pair())
        assert out.left == bytes(20) and out.predicted == NO_PREDICTION

    def test_stage_latencies_recorded(self):
        node = LocalNode(FeedbackMode.DOWNSIZED)
        for _ in range(5):
            node.tick(self._pair())
        for stage in ("decode", "downsize", "inference", "mask_encode", "msg_encode", "total"):
            assert len(node.stats.samples[stage]) == 5
        assert node.stats.percentile("total", 99) >= 0.0

    def test_matches_render_feedback(self, trained_toy_model):
        """The staged inline pipeline and the pure function agree bit-for-bit."""
        from tiltxter.core import BiFrame, Finger, SensorFrame, dequantize_force

        pair = self._pair(seed=3, deg=45)
        grids = [dequantize_force(np.frombuffer(raw, dtype=np.uint8).reshape(10, 10))
                 for raw in (pair.left, pair.right)]
        bf = BiFrame(left=SensorFrame(Finger.LEFT, grids[0]),
                     right=SensorFrame(Finger.RIGHT, grids[1]),
                     gripper_pos=pair.gripper_pos)
        for mode, model in ((FeedbackMode.NONE, None), (FeedbackMode.DOWNSIZED, None),
                            (FeedbackMode.CNN_PATTERN, trained_toy_model)):
            node = LocalNode(mode, model)
            out = node.tick(pair)
            left, right, pred = render_feedback(mode, bf, model)
            assert out.left == left.intensities.tobytes()
            assert out.right == right.intensities.tobytes()
            assert out.predicted == (pred.index if pred else NO_PREDICTION)

    def test_output_encodes_cleanly(self):
        node = LocalNode(FeedbackMode.DOWNSIZED)
        out = node.tick(self._pair())
        assert decode_msg(encode_msg(out)) == out


class TestBench:
    def test_bench_smoke(self):
        stats = bench_local_tick(ticks=50, mode=FeedbackMode.CNN_PATTERN)
        assert len(stats.samples["total"]) == 50
        summary = stats.summary()
        assert summary["total"]["p99"] > 0
        assert summary["total"]["p50"] <= summary["total"]["max"]
