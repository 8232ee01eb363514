"""Desk-scale tactile telemanipulation pipeline.

Synthetic dual 10x10 tactile sensing of a tilted deformable pipette, a
from-scratch CNN tilt classifier over 9 angle classes, two-stage
electro-tactile rendering (bicubic downsizing then pattern AND-masking),
and a two-node 60 Hz remote/local loop with scripted-agent evaluation of
the three feedback modes.
"""

__version__ = "0.1.0"

from .core import (
    ALL_TILTS,
    TILT_DEGREES,
    BiFrame,
    DownsizedFrame,
    ElectrodeFrame,
    FeedbackMode,
    Finger,
    PatternMask,
    SensorFrame,
    TiltClass,
    class_of_degrees,
    degrees_of_class,
    dequantize_force,
    flip_left,
    quantize_force,
)
from .resample import bicubic_downsize, downsize_pair, kernel_weight
from .simulate import (
    ContactParams,
    DatasetRecord,
    gen_dataset,
    read_dataset,
    render_contact,
    split_dataset,
    write_dataset,
)
from .render import apply_mask, bank, build_bank, encode_electrode, render_feedback
from .episode import make_agent, run_episode, run_trials, success_rate
from .nodes import LocalNode, RemoteConfig, RemoteNode, bench_local_tick

__all__ = [
    "ALL_TILTS",
    "TILT_DEGREES",
    "BiFrame",
    "DownsizedFrame",
    "ElectrodeFrame",
    "FeedbackMode",
    "Finger",
    "PatternMask",
    "SensorFrame",
    "TiltClass",
    "class_of_degrees",
    "degrees_of_class",
    "dequantize_force",
    "flip_left",
    "quantize_force",
    "bicubic_downsize",
    "downsize_pair",
    "kernel_weight",
    "ContactParams",
    "DatasetRecord",
    "gen_dataset",
    "read_dataset",
    "render_contact",
    "split_dataset",
    "write_dataset",
    "apply_mask",
    "bank",
    "build_bank",
    "encode_electrode",
    "render_feedback",
    "make_agent",
    "run_episode",
    "run_trials",
    "success_rate",
    "LocalNode",
    "RemoteConfig",
    "RemoteNode",
    "bench_local_tick",
    "__version__",
]
