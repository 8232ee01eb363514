"""Stage-2 rendering: pattern bank, AND-masking, and intensity encoding.

Each tilt class owns a predefined 5x4 stimulation pattern: the raster of
the line through the grid center at the class angle (0 deg lights the
middle row, +/-90 light the two middle columns -- an even-width tie keeps
both).  The thumb-side pattern is the horizontal mirror of the index
pattern because the two finger pads face each other.

The final stimulus ANDs the selected pattern with the downsized force
frame: a cell stays live only where the pattern allows it AND the force
reaches the 1 N detection floor, and the surviving cells keep their
analog intensity so stronger contact still feels stronger.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .core import (
    CONTACT_THRESHOLD_N,
    ELECTRODE_COLS,
    ELECTRODE_ROWS,
    FORCE_MAX_N,
    TILT_DEGREES,
    BiFrame,
    DownsizedFrame,
    ElectrodeFrame,
    FeedbackMode,
    PatternMask,
    TiltClass,
)
from .resample import downsize_pair

#: Intensity byte at the 1 N detection floor; "on" must stay perceivable.
THRESHOLD_INTENSITY = 64


@dataclass(frozen=True)
class BankEntry:
    index_finger: PatternMask
    thumb: PatternMask


def _rasterize_center_line(angle_deg: float) -> PatternMask:
    """Mark the cells nearest the line through the grid center at ``angle_deg``.

    The line is sampled densely; at each sample the nearest row and column
    are marked, and an exact half-way tie marks both neighbors (this is
    what lights two full columns for vertical lines on the even-width
    grid).  Thickness is one cell otherwise.
    """
    cells = np.zeros((ELECTRODE_ROWS, ELECTRODE_COLS), dtype=bool)
    center = np.array([(ELECTRODE_ROWS - 1) / 2.0, (ELECTRODE_COLS - 1) / 2.0])
    theta = np.deg2rad(angle_deg)
    direction = np.array([-np.sin(theta), np.cos(theta)])  # (row, col) steps
    half_span = float(np.hypot(ELECTRODE_ROWS, ELECTRODE_COLS))
    for t in np.linspace(-half_span, half_span, 513):
        point = center + t * direction
        for r in _nearest_indices(point[0], ELECTRODE_ROWS):
            for c in _nearest_indices(point[1], ELECTRODE_COLS):
                cells[r, c] = True
    return PatternMask(cells)


def _nearest_indices(coord: float, size: int) -> list[int]:
    lo = int(np.floor(coord))
    hi = lo + 1
    if abs(coord - lo) == abs(hi - coord):  # exact tie: keep both neighbors
        picks = [lo, hi]
    else:
        picks = [lo if abs(coord - lo) < abs(hi - coord) else hi]
    return [i for i in picks if 0 <= i < size]


def build_bank() -> Mapping[TiltClass, BankEntry]:
    """Pattern per tilt class; +90 and -90 share one line, so one pattern."""
    bank = {}
    for idx, deg in enumerate(TILT_DEGREES):
        index_mask = _rasterize_center_line(deg)
        bank[TiltClass(idx)] = BankEntry(index_finger=index_mask, thumb=index_mask.mirrored())
    return bank


_BANK = build_bank()


def bank() -> Mapping[TiltClass, BankEntry]:
    """The process-wide pattern bank, built once and shared immutably."""
    return _BANK


def apply_mask(frame: DownsizedFrame, mask: PatternMask) -> DownsizedFrame:
    """AND a pattern with a downsized frame under the contact predicate.

    A cell survives only if the mask allows it and its force is at or
    above the 1 N detection floor; surviving cells keep their force.
    """
    keep = mask.cells & (frame.values >= CONTACT_THRESHOLD_N)
    return DownsizedFrame(np.where(keep, frame.values, 0.0))


def encode_electrode(frame: DownsizedFrame) -> ElectrodeFrame:
    """Map forces to stimulus bytes: off below 1 N, then 64..255 affinely.

    The jump to 64 at the detection floor keeps every "on" electrode
    clearly perceivable; 9 N reaches the 10 mA full scale (255).
    """
    v = frame.values
    scaled = np.rint(THRESHOLD_INTENSITY + (v - CONTACT_THRESHOLD_N) / (FORCE_MAX_N - CONTACT_THRESHOLD_N)
                     * (255 - THRESHOLD_INTENSITY))
    out = np.where(v < CONTACT_THRESHOLD_N, 0, scaled).astype(np.uint8)
    return ElectrodeFrame(out)


def render_feedback(mode: FeedbackMode, biframe: BiFrame, model=None,
                    ) -> tuple[ElectrodeFrame, ElectrodeFrame, Optional[TiltClass]]:
    """Produce the (left, right) electrode frames for one sensor pair.

    NONE yields dark frames; DOWNSIZED encodes the bicubic reductions
    directly; CNN_PATTERN classifies the pair, ANDs each finger's
    reduction with the predicted class's pattern (thumb side for the left
    finger, index side for the right), and encodes the result.  The
    predicted class is returned only in CNN_PATTERN mode.
    """
    if mode is FeedbackMode.NONE:
        return ElectrodeFrame.zeros(), ElectrodeFrame.zeros(), None
    left_small, right_small = downsize_pair(biframe)
    if mode is FeedbackMode.DOWNSIZED:
        return encode_electrode(left_small), encode_electrode(right_small), None
    if mode is FeedbackMode.CNN_PATTERN:
        if model is None:
            raise ValueError("CNN_PATTERN feedback requires a trained model")
        from .tiltnet.model import predict_tilt  # local import to avoid cycles

        predicted, _ = predict_tilt(model, biframe)
        entry = _BANK[predicted]
        left = encode_electrode(apply_mask(left_small, entry.thumb))
        right = encode_electrode(apply_mask(right_small, entry.index_finger))
        return left, right, predicted
    raise ValueError(f"unknown feedback mode {mode!r}")
