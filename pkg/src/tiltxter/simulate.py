"""Synthetic contact model standing in for the physical pipette/gripper rig.

A deformable pipette squeezed between two flat finger pads leaves a
straight line contact that widens and presses harder as the gripper
closes.  The model renders that as a Gaussian-profile band:

    force(r, c) = A(g) * exp(-d(r, c)^2 / (2 * sigma(g)^2))

where ``d`` is the taxel distance to the band's center line,
``sigma(g) = base_width + width_gain * g`` grows with closure step ``g``
(deformation widening) and ``A(g)`` is the closure-to-peak-pressure curve
(affine 1 N -> peak_force by default, keeping minimal closure at the
detection floor).  Gaussian per-taxel noise is added and forces clamp
to [0, 9] N.

Angle convention: 0 deg is a horizontal band, 90 deg vertical, and
negating the angle mirrors the band across the grid's horizontal midline.
The left finger faces the right one, so in its own coordinates it sees
the mirror image; frames are generated that way and then flipped at
ingestion so both channels of a :class:`~tiltxter.core.BiFrame` share one
orientation.

Everything is driven by explicit seeds: record ``i`` of a dataset is
reproduced bit-identically from ``(rng_seed, class, closure, rep)`` alone.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    FORCE_MAX_N,
    GRIPPER_POSITIONS,
    SENSOR_COLS,
    SENSOR_ROWS,
    TILT_DEGREES,
    BiFrame,
    Finger,
    SensorFrame,
    TiltClass,
    dequantize_force,
    flip_left,
    quantize_force,
)

MAX_GRIPPER = GRIPPER_POSITIONS - 1

DATASET_MAGIC = b"TXDS"
DATASET_VERSION = 1
_RECORD_STRUCT = struct.Struct("<BBI100s100s")


class DatasetFormatError(ValueError):
    """Raised when a dataset file does not follow the TXDS layout."""


def affine_force_curve(peak_force: float) -> Callable[[int], float]:
    """Closure -> peak pressure map rising from 1 N at step 0 to ``peak_force`` at 30."""

    def curve(gripper_pos: int) -> float:
        return 1.0 + (peak_force - 1.0) * gripper_pos / MAX_GRIPPER

    return curve


@dataclass(frozen=True)
class ContactParams:
    """Knobs of the synthetic pipette footprint."""

    band_angle_deg: float = 0.0  # constant bias added to the class angle
    center_offset: tuple[float, float] = (0.0, 0.0)  # (row, col) taxels
    base_width: float = 0.7  # Gaussian sigma at minimal closure, taxels
    width_gain: float = 0.01  # sigma growth per closure step
    peak_force: float = 8.0  # peak pressure at maximal closure, N
    force_gain_curve: Optional[Callable[[int], float]] = None
    noise_sigma: float = 0.15  # per-taxel Gaussian noise, N
    jitter: float = 0.75  # uniform +/- band-center jitter, taxels
    rng_seed: int = 0

    def __post_init__(self):
        if self.base_width <= 0:
            raise ValueError("base_width must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.curve(MAX_GRIPPER) > FORCE_MAX_N:
            raise ValueError(f"peak pressure at closure {MAX_GRIPPER} must not exceed {FORCE_MAX_N} N")

    def curve(self, gripper_pos: int) -> float:
        fn = self.force_gain_curve or affine_force_curve(self.peak_force)
        return fn(gripper_pos)

    def sigma(self, gripper_pos: int) -> float:
        return self.base_width + self.width_gain * gripper_pos


@dataclass(frozen=True)
class DatasetRecord:
    biframe: BiFrame
    label: TiltClass
    gripper_pos: int
    sample_id: int


def band_image(angle_deg: float, center: tuple[float, float], sigma: float, amplitude: float) -> np.ndarray:
    """Noise-free Gaussian band on the 10x10 grid.

    ``center`` is the (row, col) point the band passes through; the band
    runs at ``angle_deg`` from horizontal, increasing angles tipping the
    right-hand end toward row 0.
    """
    rr, cc = np.meshgrid(np.arange(SENSOR_ROWS, dtype=np.float64),
                         np.arange(SENSOR_COLS, dtype=np.float64), indexing="ij")
    # A band is a line: angles half a turn apart are the same footprint.
    # Wrapping into [-90, 90) makes that identity exact (+90 and -90
    # produce bit-identical frames instead of agreeing to the last ulp).
    theta = np.deg2rad(((angle_deg + 90.0) % 180.0) - 90.0)
    # signed distance to the line through `center` with direction
    # (cos, -sin) in (col, row) coordinates
    d = (cc - center[1]) * np.sin(theta) + (rr - center[0]) * np.cos(theta)
    return amplitude * np.exp(-(d * d) / (2.0 * sigma * sigma))


def _record_rng(params: ContactParams, tilt: TiltClass, gripper_pos: int, entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([params.rng_seed, tilt.index, gripper_pos, entropy]))


def render_contact(tilt: TiltClass, gripper_pos: int, params: ContactParams, entropy: int = 0) -> BiFrame:
    """Render one labeled BiFrame of the tilted pipette at a closure step.

    ``entropy`` selects the record's private noise stream; identical
    arguments reproduce the frame bit for bit.  Draw order is fixed:
    center jitter (row, col), left noise grid, right noise grid.
    """
    if not 0 <= gripper_pos <= MAX_GRIPPER:
        raise ValueError(f"gripper_pos must be in [0, {MAX_GRIPPER}]")
    rng = _record_rng(params, tilt, gripper_pos, entropy)
    jit = rng.uniform(-params.jitter, params.jitter, size=2)
    center = (SENSOR_ROWS - 1) / 2.0 + params.center_offset[0] + jit[0], \
             (SENSOR_COLS - 1) / 2.0 + params.center_offset[1] + jit[1]
    angle = tilt.degrees + params.band_angle_deg
    clean = band_image(angle, center, params.sigma(gripper_pos), params.curve(gripper_pos))

    def noisy(img: np.ndarray) -> np.ndarray:
        if params.noise_sigma > 0:
            img = img + rng.normal(0.0, params.noise_sigma, size=img.shape)
        return np.clip(img, 0.0, FORCE_MAX_N)

    seen_left = noisy(clean)  # contact as oriented after ingestion flip
    seen_right = noisy(clean)
    # The left pad faces the right one and records the mirror image; flip
    # it back at ingestion so both channels share the right orientation.
    left_raw = SensorFrame(Finger.LEFT, seen_left[:, ::-1])
    return BiFrame(left=flip_left(left_raw), right=SensorFrame(Finger.RIGHT, seen_right),
                   gripper_pos=gripper_pos, tilt=tilt)


def gen_dataset(params: ContactParams, reps_per_cell: int = 32) -> list[DatasetRecord]:
    """Generate the full labeled dataset: 9 classes x 31 closures x reps.

    Records are ordered by (class, closure, rep) with sequential sample
    ids; per-record seeds derive from (rng_seed, class, closure, rep) so
    regeneration is bit-identical regardless of chunking.
    """
    if reps_per_cell < 1:
        raise ValueError("reps_per_cell must be at least 1")
    records = []
    sample_id = 0
    for cls_index in range(len(TILT_DEGREES)):
        tilt = TiltClass(cls_index)
        for gripper_pos in range(GRIPPER_POSITIONS):
            for rep in range(reps_per_cell):
                bf = render_contact(tilt, gripper_pos, params, entropy=rep)
                records.append(DatasetRecord(bf, tilt, gripper_pos, sample_id))
                sample_id += 1
    return records


def split_dataset(records: Sequence[DatasetRecord], seed: int) -> tuple[list[DatasetRecord], list[DatasetRecord], list[DatasetRecord]]:
    """Stratified 50/25/25 shuffle split into (train, val, test).

    Within each class the shuffled records go half to train; of the
    remainder, validation takes the ceiling half and test the floor (so
    sizes not divisible by four round val up, test down).  Splits are
    disjoint, cover the input, and are deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    by_class: dict[int, list[DatasetRecord]] = {}
    for rec in records:
        by_class.setdefault(rec.label.index, []).append(rec)
    train: list[DatasetRecord] = []
    val: list[DatasetRecord] = []
    test: list[DatasetRecord] = []
    for cls_index in sorted(by_class):
        group = by_class[cls_index]
        order = rng.permutation(len(group))
        n_train = len(group) // 2
        n_val = (len(group) - n_train + 1) // 2
        for pos, idx in enumerate(order):
            if pos < n_train:
                train.append(group[idx])
            elif pos < n_train + n_val:
                val.append(group[idx])
            else:
                test.append(group[idx])
    return train, val, test


def write_dataset(records: Sequence[DatasetRecord], path) -> None:
    """Write records in the TXDS binary layout (little-endian).

    Header: magic ``TXDS``, u16 version, u32 record count.  Each record:
    u8 label index, u8 closure step, u32 sample id, 100 bytes left grid
    (byte-quantized, row-major, post-flip), 100 bytes right grid.
    """
    with open(path, "wb") as fh:
        fh.write(DATASET_MAGIC)
        fh.write(struct.pack("<HI", DATASET_VERSION, len(records)))
        for rec in records:
            left = quantize_force(rec.biframe.left.forces).tobytes()
            right = quantize_force(rec.biframe.right.forces).tobytes()
            fh.write(_RECORD_STRUCT.pack(rec.label.index, rec.gripper_pos, rec.sample_id, left, right))


def read_dataset(path) -> list[DatasetRecord]:
    """Read a TXDS file back into records (forces dequantized to floats)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != DATASET_MAGIC:
        raise DatasetFormatError(f"{path}: not a TXDS dataset (bad magic)")
    if len(blob) < 10:
        raise DatasetFormatError(f"{path}: truncated header")
    version, count = struct.unpack_from("<HI", blob, 4)
    if version != DATASET_VERSION:
        raise DatasetFormatError(f"{path}: unsupported dataset version {version}")
    expected = 10 + count * _RECORD_STRUCT.size
    if len(blob) != expected:
        raise DatasetFormatError(f"{path}: expected {expected} bytes for {count} records, found {len(blob)}")
    records = []
    offset = 10
    for _ in range(count):
        label, gripper_pos, sample_id, left, right = _RECORD_STRUCT.unpack_from(blob, offset)
        offset += _RECORD_STRUCT.size
        if label >= len(TILT_DEGREES):
            raise DatasetFormatError(f"{path}: label index {label} out of range at record {sample_id}")
        tilt = TiltClass(label)
        bf = BiFrame(
            left=SensorFrame(Finger.LEFT, _grid_from_bytes(left)),
            right=SensorFrame(Finger.RIGHT, _grid_from_bytes(right)),
            gripper_pos=gripper_pos,
            tilt=tilt,
        )
        records.append(DatasetRecord(bf, tilt, gripper_pos, sample_id))
    return records


def _grid_from_bytes(raw: bytes) -> np.ndarray:
    q = np.frombuffer(raw, dtype=np.uint8).reshape(SENSOR_ROWS, SENSOR_COLS)
    return dequantize_force(q)


def default_params(seed: int = 0, noise_sigma: Optional[float] = None) -> ContactParams:
    """The stock parameter set used by the command-line tools."""
    p = ContactParams(rng_seed=seed)
    if noise_sigma is not None:
        p = replace(p, noise_sigma=noise_sigma)
    return p
