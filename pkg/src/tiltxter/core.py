"""Shared domain types and unit conventions for the tactile pipeline.

Conventions used throughout the package:

* Sensor grids are 10x10 arrays of contact force in newtons, row-major,
  row 0 at the distal edge, column 0 at the leftmost taxel as seen from
  the contact surface.  Forces live in [0, 9] N; values below 1 N are
  storable but count as "below detection" (see :data:`CONTACT_THRESHOLD_N`).
* Electrode grids are 5 rows x 4 columns.  Intensities are bytes,
  0 = stimulus off, 255 = 10 mA full scale, carried at a fixed 120 Hz.
* Forces are kept as float64 internally and quantized to u8 only at
  file and wire boundaries (:func:`quantize_force` / :func:`dequantize_force`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SENSOR_ROWS = 10
SENSOR_COLS = 10
ELECTRODE_ROWS = 5
ELECTRODE_COLS = 4
FORCE_MAX_N = 9.0
CONTACT_THRESHOLD_N = 1.0
CARRIER_HZ = 120
GRIPPER_POSITIONS = 31  # closure indices 0..30, minimum to maximum pressure

#: The nine tilt angles, ascending.  Index 4 is 0 degrees.
TILT_DEGREES = (-90, -60, -45, -30, 0, 30, 45, 60, 90)


class Finger(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class FeedbackMode(enum.IntEnum):
    """The three rendering conditions, with their wire codes."""

    NONE = 0
    DOWNSIZED = 1
    CNN_PATTERN = 2


def _readonly(a: np.ndarray, shape: tuple[int, int], dtype) -> np.ndarray:
    arr = np.ascontiguousarray(a, dtype=dtype)
    if arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SensorFrame:
    """One finger's 10x10 grid of contact forces in newtons."""

    finger: Finger
    forces: np.ndarray

    def __post_init__(self):
        arr = _readonly(self.forces, (SENSOR_ROWS, SENSOR_COLS), np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("forces must be finite")
        if arr.min() < 0.0 or arr.max() > FORCE_MAX_N:
            raise ValueError(f"forces must lie in [0, {FORCE_MAX_N}] N")
        object.__setattr__(self, "forces", arr)

    def contact_mask(self) -> np.ndarray:
        """Boolean grid of taxels at or above the 1 N detection floor."""
        return self.forces >= CONTACT_THRESHOLD_N


@dataclass(frozen=True)
class BiFrame:
    """Ordered pair of finger frames: (left, already flipped; right).

    This is the classifier input and the wire payload.  The left frame is
    stored post-flip so both channels share the right finger's column
    orientation.
    """

    left: SensorFrame
    right: SensorFrame
    gripper_pos: int
    tilt: Optional["TiltClass"] = None

    def __post_init__(self):
        if self.left.finger is not Finger.LEFT:
            raise ValueError("left frame must carry the Left finger tag")
        if self.right.finger is not Finger.RIGHT:
            raise ValueError("right frame must carry the Right finger tag")
        if not 0 <= int(self.gripper_pos) <= GRIPPER_POSITIONS - 1:
            raise ValueError(f"gripper_pos must be in [0, {GRIPPER_POSITIONS - 1}]")
        object.__setattr__(self, "gripper_pos", int(self.gripper_pos))

    def stacked(self) -> np.ndarray:
        """Both grids as a (2, 10, 10) array: channel 0 left, channel 1 right."""
        return np.stack([self.left.forces, self.right.forces])


@dataclass(frozen=True, order=True)
class TiltClass:
    """One of the nine tilt labels, identified by ascending index."""

    index: int

    def __post_init__(self):
        if not 0 <= self.index < len(TILT_DEGREES):
            raise ValueError(f"tilt class index must be in [0, {len(TILT_DEGREES) - 1}]")

    @property
    def degrees(self) -> int:
        return TILT_DEGREES[self.index]

    def __repr__(self):
        return f"TiltClass({self.degrees:+d}deg)"


ALL_TILTS = tuple(TiltClass(i) for i in range(len(TILT_DEGREES)))


def class_of_degrees(deg: int) -> TiltClass:
    """Map a nominal angle to its class; raises on angles outside the label set."""
    try:
        return ALL_TILTS[TILT_DEGREES.index(deg)]
    except ValueError:
        raise ValueError(f"{deg} deg is not one of the tilt classes {TILT_DEGREES}") from None


def degrees_of_class(cls: TiltClass) -> int:
    return cls.degrees


@dataclass(frozen=True)
class DownsizedFrame:
    """5x4 grid of real forces produced by the stage-1 downsizer."""

    values: np.ndarray

    def __post_init__(self):
        arr = _readonly(self.values, (ELECTRODE_ROWS, ELECTRODE_COLS), np.float64)
        if arr.min() < 0.0 or arr.max() > FORCE_MAX_N:
            raise ValueError(f"downsized values must lie in [0, {FORCE_MAX_N}] N")
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class PatternMask:
    """5x4 boolean stimulation pattern; every mask lights at least one cell."""

    cells: np.ndarray

    def __post_init__(self):
        arr = _readonly(self.cells, (ELECTRODE_ROWS, ELECTRODE_COLS), np.bool_)
        if not arr.any():
            raise ValueError("a pattern mask must light at least one cell")
        object.__setattr__(self, "cells", arr)

    def mirrored(self) -> "PatternMask":
        """Horizontal mirror (thumb-side counterpart of an index pattern)."""
        return PatternMask(self.cells[:, ::-1])


@dataclass(frozen=True)
class ElectrodeFrame:
    """5x4 grid of stimulation intensities, bytes 0..255 at the fixed carrier."""

    intensities: np.ndarray
    carrier_hz: int = field(default=CARRIER_HZ)

    def __post_init__(self):
        arr = _readonly(self.intensities, (ELECTRODE_ROWS, ELECTRODE_COLS), np.uint8)
        object.__setattr__(self, "intensities", arr)
        if self.carrier_hz != CARRIER_HZ:
            raise ValueError(f"carrier frequency is fixed at {CARRIER_HZ} Hz")

    @classmethod
    def zeros(cls) -> "ElectrodeFrame":
        return cls(np.zeros((ELECTRODE_ROWS, ELECTRODE_COLS), dtype=np.uint8))


def quantize_force(f) -> np.ndarray | int:
    """Quantize forces to bytes: round(clamp(f, 0, 9) / 9 * 255), half-to-even.

    Accepts scalars or arrays; out-of-range input is absorbed by the clamp.
    """
    f = np.asarray(f, dtype=np.float64)
    q = np.rint(np.clip(f, 0.0, FORCE_MAX_N) / FORCE_MAX_N * 255.0).astype(np.uint8)
    return q if q.ndim else int(q)


def dequantize_force(q) -> np.ndarray | float:
    """Inverse of :func:`quantize_force` up to the quantization step: q/255*9."""
    v = np.asarray(q, dtype=np.float64) / 255.0 * FORCE_MAX_N
    return v if v.ndim else float(v)


def flip_left(frame: SensorFrame) -> SensorFrame:
    """Mirror a left-finger frame horizontally (column j -> 9-j).

    Only left frames may be flipped; a right frame here means the caller
    wired the fingers up backwards.
    """
    if frame.finger is not Finger.LEFT:
        raise ValueError("flip_left applies to Left-finger frames only")
    return SensorFrame(Finger.LEFT, frame.forces[:, ::-1])
