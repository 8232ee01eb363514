"""The two processing nodes of the 60 Hz loop, free of any transport.

The remote node stands in for the robot cell: it holds the pipette at a
fixed tilt, slews its virtual tool orientation toward commanded targets,
applies gripper closure immediately, and publishes quantized sensor
pairs.  The local node turns sensor pairs into electrode frames through
the selected feedback mode and keeps per-stage latency statistics.

Angles compare as line orientations: a pipette grasped 180 degrees off
is still aligned, so relative angles wrap into [-90, 90).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .core import (
    FeedbackMode,
    Finger,
    BiFrame,
    SensorFrame,
    TiltClass,
    TILT_DEGREES,
    dequantize_force,
    quantize_force,
)
from .render import apply_mask, encode_electrode
from .render import bank as pattern_bank
from .resample import downsize_pair
from .simulate import ContactParams, render_contact
from .tiltnet.model import predict_tilt
from .wire import (
    NO_PREDICTION,
    Command,
    Electrode,
    GraspAck,
    SensorPair,
)

log = logging.getLogger(__name__)

TICK_HZ = 60
TICK_DT_S = 1.0 / TICK_HZ
TICK_BUDGET_MS = 1000.0 / TICK_HZ  # 16.67 ms for the whole loop
GRASP_TOLERANCE_DEG = 15.0  # half the minimum class spacing


def wrap_orientation(deg: float) -> float:
    """Collapse an angle to its line orientation in [-90, 90)."""
    return ((deg + 90.0) % 180.0) - 90.0


def snap_to_class(deg: float) -> TiltClass:
    """Nearest tilt class to an arbitrary relative angle."""
    wrapped = wrap_orientation(deg)
    diffs = [min(abs(wrapped - d), 180.0 - abs(wrapped - d)) for d in TILT_DEGREES]
    return TiltClass(int(np.argmin(diffs)))


@dataclass
class RemoteConfig:
    holder_tilt_deg: int = 0
    seed: int = 0
    slew_deg_per_s: float = 90.0
    initial_gripper: int = 15
    params: ContactParams = field(default_factory=ContactParams)


class RemoteNode:
    """Simulated robot cell: sensing source and command sink."""

    def __init__(self, cfg: RemoteConfig):
        self.cfg = cfg
        self.orientation = 0.0
        self.target = 0.0
        self.gripper_pos = cfg.initial_gripper
        self.seq = 0
        self.tick_index = 0
        # The pipette sits still in its holder: draw its placement offset
        # once per session, then render with per-tick noise only.
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0xC0FFEE]))
        offset = rng.uniform(-cfg.params.jitter, cfg.params.jitter, size=2)
        self.params = replace(cfg.params, jitter=0.0, rng_seed=cfg.seed,
                              center_offset=(float(offset[0]), float(offset[1])))

    @property
    def relative_deg(self) -> float:
        return wrap_orientation(self.cfg.holder_tilt_deg - self.orientation)

    def apply_command(self, cmd: Command) -> None:
        self.target = float(np.clip(cmd.target_tilt_deg, -90.0, 90.0))
        self.gripper_pos = int(cmd.gripper_pos)

    def judge_grasp(self, cmd: Command, t_us: int = 0) -> GraspAck:
        """Score a grasp-flagged command against the alignment tolerance."""
        rel = self.relative_deg
        self.seq += 1
        return GraspAck(seq=self.seq, t_us=t_us, success=abs(rel) <= GRASP_TOLERANCE_DEG,
                        relative_centideg=int(round(rel * 100)))

    def tick(self, command: Optional[Command] = None, t_us: int = 0) -> SensorPair:
        """Advance one 16.67 ms step and publish the sensed pair."""
        if command is not None:
            self.apply_command(command)
        max_step = self.cfg.slew_deg_per_s * TICK_DT_S
        self.orientation += float(np.clip(self.target - self.orientation, -max_step, max_step))
        footprint = snap_to_class(self.relative_deg)
        bf = render_contact(footprint, self.gripper_pos, self.params, entropy=self.tick_index)
        self.tick_index += 1
        self.seq += 1
        return SensorPair(
            seq=self.seq,
            t_us=t_us,
            gripper_pos=self.gripper_pos,
            left=quantize_force(bf.left.forces).tobytes(),
            right=quantize_force(bf.right.forces).tobytes(),
        )


STAGES = ("decode", "downsize", "inference", "mask_encode", "msg_encode")


class LatencyStats:
    """Per-stage and total tick latencies, in milliseconds."""

    def __init__(self):
        self.samples: dict[str, list[float]] = {s: [] for s in (*STAGES, "total")}
        self.overruns = 0

    def record(self, stage: str, ms: float) -> None:
        self.samples[stage].append(ms)

    def percentile(self, stage: str, q: float) -> float:
        data = self.samples[stage]
        return float(np.percentile(data, q)) if data else float("nan")

    def summary(self) -> dict[str, dict[str, float]]:
        out = {}
        for stage, data in self.samples.items():
            if data:
                out[stage] = {
                    "p50": float(np.percentile(data, 50)),
                    "p90": float(np.percentile(data, 90)),
                    "p99": float(np.percentile(data, 99)),
                    "max": float(np.max(data)),
                    "mean": float(np.mean(data)),
                }
        return out


class LocalNode:
    """Pipeline node: sensor pair in, electrode frame out."""

    def __init__(self, mode: FeedbackMode, model=None):
        self.mode = mode
        self.model = model
        self.stats = LatencyStats()
        self.seq = 0
        self.last_predicted: int = NO_PREDICTION
        self._model_fault_logged = False

    def tick(self, pair: SensorPair, t_us: int = 0) -> Electrode:
        """Render one sensor pair; the output seq mirrors the input's.

        The stages mirror :func:`tiltxter.render.render_feedback` exactly
        but are laid out inline so each one can be timed.
        """
        zeros = bytes(20)
        t0 = time.perf_counter_ns()
        biframe = BiFrame(
            left=SensorFrame(Finger.LEFT, _grid(pair.left)),
            right=SensorFrame(Finger.RIGHT, _grid(pair.right)),
            gripper_pos=pair.gripper_pos,
        )
        t1 = time.perf_counter_ns()
        predicted = NO_PREDICTION
        fault = self.mode is FeedbackMode.CNN_PATTERN and self.model is None
        if self.mode is FeedbackMode.NONE or fault:
            t2 = t3 = t4 = time.perf_counter_ns()
            left, right = zeros, zeros
            if fault and not self._model_fault_logged:
                log.warning("pattern mode without a model: emitting dark frames")
                self._model_fault_logged = True
        else:
            left_small, right_small = downsize_pair(biframe)
            t2 = time.perf_counter_ns()
            if self.mode is FeedbackMode.CNN_PATTERN:
                cls, _ = predict_tilt(self.model, biframe)
                predicted = cls.index
                t3 = time.perf_counter_ns()
                entry = pattern_bank()[cls]
                left = encode_electrode(apply_mask(left_small, entry.thumb)).intensities.tobytes()
                right = encode_electrode(apply_mask(right_small, entry.index_finger)).intensities.tobytes()
            else:
                t3 = t2
                left = encode_electrode(left_small).intensities.tobytes()
                right = encode_electrode(right_small).intensities.tobytes()
            t4 = time.perf_counter_ns()
        self.last_predicted = predicted
        msg = Electrode(seq=pair.seq, t_us=t_us, left=left, right=right, predicted=predicted)
        t5 = time.perf_counter_ns()
        self.stats.record("decode", (t1 - t0) / 1e6)
        self.stats.record("downsize", (t2 - t1) / 1e6)
        self.stats.record("inference", (t3 - t2) / 1e6)
        self.stats.record("mask_encode", (t4 - t3) / 1e6)
        self.stats.record("msg_encode", (t5 - t4) / 1e6)
        self.stats.record("total", (t5 - t0) / 1e6)
        return msg


def _grid(raw: bytes) -> np.ndarray:
    return dequantize_force(np.frombuffer(raw, dtype=np.uint8).reshape(10, 10))


def bench_local_tick(ticks: int = 1000, mode: FeedbackMode = FeedbackMode.CNN_PATTERN,
                     model=None, seed: int = 0) -> LatencyStats:
    """Measure end-to-end local_tick latency over synthetic traffic.

    Exercises the full path including the wire codec on both sides, the
    way a deployed node would see it.
    """
    from . import wire
    from .tiltnet.model import TiltNet

    if model is None and mode is FeedbackMode.CNN_PATTERN:
        model = TiltNet(seed=seed)  # inference cost is identical untrained
    remote = RemoteNode(RemoteConfig(holder_tilt_deg=30, seed=seed))
    local = LocalNode(mode, model)
    for i in range(ticks):
        frame = wire.encode_msg(remote.tick(t_us=i * 16_667))
        t0 = time.perf_counter_ns()
        pair = wire.decode_msg(frame)
        out = local.tick(pair, t_us=i * 16_667)
        wire.encode_msg(out)
        t1 = time.perf_counter_ns()
        # overwrite the node's internal total with the codec-inclusive one
        local.stats.samples["total"][-1] = (t1 - t0) / 1e6
    return local.stats
