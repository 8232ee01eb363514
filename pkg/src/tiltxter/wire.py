"""Binary node protocol: length-prefixed frames, little-endian fields.

Frame layout: ``u32 length`` (type byte + payload), ``u8 type``, payload.

    type 1  SensorPair   u32 seq, u64 t_us, u8 gripper_pos,
                         100 bytes left grid, 100 bytes right grid
    type 2  Command      u32 seq, u64 t_us, i16 target_tilt_deg,
                         u8 gripper_pos, u8 mode, u8 flags (bit 0 = grasp)
    type 3  Electrode    u32 seq, u64 t_us, 20 bytes left intensities,
                         20 bytes right intensities, u8 predicted (255 = none)
    type 4  Heartbeat    u32 seq, u64 t_us
    type 5  GraspAck     u32 seq, u64 t_us, u8 success,
                         i16 relative angle in centidegrees

Grids travel byte-quantized (see :func:`tiltxter.core.quantize_force`);
the left grid is post-flip, as stored in a BiFrame.  Sequence numbers
increase strictly per sender; timestamps are sender-local microseconds.
Malformed input raises :class:`ProtocolError` carrying the byte offset of
the problem -- decoding never throws anything else.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Iterator, Union

HEADER = struct.Struct("<IB")
TAG_SENSOR_PAIR = 1
TAG_COMMAND = 2
TAG_ELECTRODE = 3
TAG_HEARTBEAT = 4
TAG_GRASP_ACK = 5

FLAG_GRASP = 0x01
NO_PREDICTION = 255

_SENSOR_STRUCT = struct.Struct("<IQB100s100s")
_COMMAND_STRUCT = struct.Struct("<IQhBBB")
_ELECTRODE_STRUCT = struct.Struct("<IQ20s20sB")
_HEARTBEAT_STRUCT = struct.Struct("<IQ")
_GRASP_ACK_STRUCT = struct.Struct("<IQBh")

MAX_FRAME_BYTES = 1 + max(s.size for s in
                          (_SENSOR_STRUCT, _COMMAND_STRUCT, _ELECTRODE_STRUCT,
                           _HEARTBEAT_STRUCT, _GRASP_ACK_STRUCT))


class ProtocolError(ValueError):
    """Wire-format violation, pinned to a byte offset."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(frozen=True)
class SensorPair:
    seq: int
    t_us: int
    gripper_pos: int
    left: bytes  # 100 quantized forces, row-major, post-flip
    right: bytes

    json_type = "sensor_pair"


@dataclass(frozen=True)
class Command:
    seq: int
    t_us: int
    target_tilt_deg: int
    gripper_pos: int
    mode: int
    flags: int = 0

    json_type = "command"

    @property
    def grasp(self) -> bool:
        return bool(self.flags & FLAG_GRASP)


@dataclass(frozen=True)
class Electrode:
    seq: int
    t_us: int
    left: bytes  # 20 intensity bytes, row-major
    right: bytes
    predicted: int = NO_PREDICTION

    json_type = "electrode"


@dataclass(frozen=True)
class Heartbeat:
    seq: int
    t_us: int

    json_type = "heartbeat"


@dataclass(frozen=True)
class GraspAck:
    seq: int
    t_us: int
    success: bool
    relative_centideg: int

    json_type = "grasp_ack"


WireMessage = Union[SensorPair, Command, Electrode, Heartbeat, GraspAck]

_TAG_OF = {SensorPair: TAG_SENSOR_PAIR, Command: TAG_COMMAND, Electrode: TAG_ELECTRODE,
           Heartbeat: TAG_HEARTBEAT, GraspAck: TAG_GRASP_ACK}


def _validate(msg: WireMessage, offset: int = 0) -> None:
    if not 0 <= msg.seq <= 0xFFFFFFFF:
        raise ProtocolError(f"seq {msg.seq} outside u32", offset)
    if not 0 <= msg.t_us <= 0xFFFFFFFFFFFFFFFF:
        raise ProtocolError(f"t_us {msg.t_us} outside u64", offset)
    if isinstance(msg, SensorPair):
        if len(msg.left) != 100 or len(msg.right) != 100:
            raise ProtocolError("sensor grids must be 100 bytes each", offset)
        if msg.gripper_pos > 30:
            raise ProtocolError(f"gripper_pos {msg.gripper_pos} outside 0..30", offset)
    elif isinstance(msg, Command):
        if msg.mode not in (0, 1, 2):
            raise ProtocolError(f"mode {msg.mode} outside 0..2", offset)
        if msg.gripper_pos > 30:
            raise ProtocolError(f"gripper_pos {msg.gripper_pos} outside 0..30", offset)
        if not -32768 <= msg.target_tilt_deg <= 32767:
            raise ProtocolError("target_tilt_deg outside i16", offset)
        if not 0 <= msg.flags <= 0xFF:
            raise ProtocolError("flags outside u8", offset)
    elif isinstance(msg, Electrode):
        if len(msg.left) != 20 or len(msg.right) != 20:
            raise ProtocolError("electrode grids must be 20 bytes each", offset)
        if msg.predicted != NO_PREDICTION and msg.predicted > 8:
            raise ProtocolError(f"predicted class {msg.predicted} outside 0..8/255", offset)


def encode_msg(msg: WireMessage) -> bytes:
    """Serialize one message into a length-prefixed frame."""
    _validate(msg)
    if isinstance(msg, SensorPair):
        payload = _SENSOR_STRUCT.pack(msg.seq, msg.t_us, msg.gripper_pos, msg.left, msg.right)
    elif isinstance(msg, Command):
        payload = _COMMAND_STRUCT.pack(msg.seq, msg.t_us, msg.target_tilt_deg,
                                       msg.gripper_pos, msg.mode, msg.flags)
    elif isinstance(msg, Electrode):
        payload = _ELECTRODE_STRUCT.pack(msg.seq, msg.t_us, msg.left, msg.right, msg.predicted)
    elif isinstance(msg, Heartbeat):
        payload = _HEARTBEAT_STRUCT.pack(msg.seq, msg.t_us)
    elif isinstance(msg, GraspAck):
        payload = _GRASP_ACK_STRUCT.pack(msg.seq, msg.t_us, int(msg.success), msg.relative_centideg)
    else:
        raise ProtocolError(f"cannot encode {type(msg).__name__}")
    return HEADER.pack(len(payload) + 1, _TAG_OF[type(msg)]) + payload


def _decode_payload(tag: int, payload: bytes, offset: int) -> WireMessage:
    try:
        if tag == TAG_SENSOR_PAIR:
            msg: WireMessage = SensorPair(*_SENSOR_STRUCT.unpack(payload))
        elif tag == TAG_COMMAND:
            msg = Command(*_COMMAND_STRUCT.unpack(payload))
        elif tag == TAG_ELECTRODE:
            msg = Electrode(*_ELECTRODE_STRUCT.unpack(payload))
        elif tag == TAG_HEARTBEAT:
            msg = Heartbeat(*_HEARTBEAT_STRUCT.unpack(payload))
        elif tag == TAG_GRASP_ACK:
            seq, t_us, success, rel = _GRASP_ACK_STRUCT.unpack(payload)
            msg = GraspAck(seq, t_us, bool(success), rel)
        else:
            raise ProtocolError(f"unknown message type {tag}", offset + 4)
    except struct.error:
        raise ProtocolError(f"payload size {len(payload)} wrong for type {tag}", offset + 5) from None
    _validate(msg, offset + 5)
    return msg


def decode_msg(data: bytes, offset: int = 0) -> WireMessage:
    """Decode exactly one frame; trailing bytes are a length mismatch."""
    msg, consumed = decode_prefix(data, offset)
    if offset + consumed != len(data):
        raise ProtocolError(f"{len(data) - offset - consumed} unexpected trailing bytes",
                            offset + consumed)
    return msg


def decode_prefix(data: bytes, offset: int = 0) -> tuple[WireMessage, int]:
    """Decode the frame starting at ``offset``; returns (message, bytes used)."""
    if len(data) - offset < HEADER.size:
        raise ProtocolError(f"truncated frame header ({len(data) - offset} bytes)", offset)
    length, tag = HEADER.unpack_from(data, offset)
    if length < 1:
        raise ProtocolError(f"frame length {length} below minimum 1", offset)
    if length > MAX_FRAME_BYTES:
        raise ProtocolError(f"frame length {length} exceeds maximum {MAX_FRAME_BYTES}", offset)
    end = offset + 4 + length
    if end > len(data):
        raise ProtocolError(f"truncated payload: frame wants {length} bytes, "
                            f"{len(data) - offset - 4} available", offset + 4)
    payload = data[offset + 5:end]
    msg = _decode_payload(tag, payload, offset)
    return msg, 4 + length


def iter_frames(data: bytes) -> Iterator[WireMessage]:
    """Decode a buffer of back-to-back frames."""
    offset = 0
    while offset < len(data):
        msg, used = decode_prefix(data, offset)
        offset += used
        yield msg


class SequenceGuard:
    """Enforces strictly increasing sequence numbers from one sender."""

    def __init__(self):
        self._last: dict[type, int] = {}

    def check(self, msg: WireMessage) -> WireMessage:
        last = self._last.get(type(msg))
        if last is not None and msg.seq <= last:
            raise ProtocolError(f"sequence regression: {msg.seq} after {last}")
        self._last[type(msg)] = msg.seq
        return msg


def to_json(msg: WireMessage) -> str:
    """One-line JSON mirror form: {type, seq, t_us, ...arrays as int lists}."""
    obj: dict = {"type": msg.json_type, "seq": msg.seq, "t_us": msg.t_us}
    if isinstance(msg, SensorPair):
        obj.update(gripper_pos=msg.gripper_pos, left=list(msg.left), right=list(msg.right))
    elif isinstance(msg, Command):
        obj.update(target_tilt_deg=msg.target_tilt_deg, gripper_pos=msg.gripper_pos,
                   mode=msg.mode, flags=msg.flags)
    elif isinstance(msg, Electrode):
        obj.update(left=list(msg.left), right=list(msg.right), predicted=msg.predicted)
    elif isinstance(msg, GraspAck):
        obj.update(success=msg.success, relative_centideg=msg.relative_centideg)
    return json.dumps(obj, separators=(",", ":"))


def command_from_json(text: str) -> Command:
    """Parse a console Command from its JSON mirror form."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"bad command JSON: {exc}") from None
    if not isinstance(obj, dict) or obj.get("type") != Command.json_type:
        raise ProtocolError("mirror input must be a command object")
    try:
        msg = Command(
            seq=int(obj["seq"]),
            t_us=int(obj.get("t_us", 0)),
            target_tilt_deg=int(obj["target_tilt_deg"]),
            gripper_pos=int(obj["gripper_pos"]),
            mode=int(obj["mode"]),
            flags=int(obj.get("flags", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"bad command fields: {exc}") from None
    _validate(msg)
    return msg
