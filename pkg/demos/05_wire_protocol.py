"""The binary node protocol, frame by frame.

Everything between the two nodes travels as little-endian frames:
a u32 length, a type byte, then the payload.  This script assembles each
variant, hexdumps it, and shows the decoder rejecting damaged input.
"""

from tiltxter import wire


def hexdump(blob, width=16):
    lines = []
    for i in range(0, len(blob), width):
        chunk = blob[i:i + width]
        lines.append(f"{i:04x}  " + " ".join(f"{b:02x}" for b in chunk))
    return "\n".join(lines)


messages = [
    wire.Heartbeat(seq=1, t_us=1_000_000),
    wire.Command(seq=2, t_us=1_016_667, target_tilt_deg=-45, gripper_pos=20,
                 mode=2, flags=wire.FLAG_GRASP),
    wire.Electrode(seq=3, t_us=1_033_334, left=bytes(range(20)),
                   right=bytes(20), predicted=6),
    wire.GraspAck(seq=4, t_us=1_050_001, success=True, relative_centideg=-230),
]

for msg in messages:
    frame = wire.encode_msg(msg)
    print(f"\n{type(msg).__name__} -> {len(frame)} bytes")
    print(hexdump(frame))
    assert wire.decode_msg(frame) == msg  # the codec law

# A SensorPair carries both 100-byte grids; 218 bytes per tick at 60 Hz
# is about 13 kB/s of sensor traffic.
pair = wire.SensorPair(seq=5, t_us=0, gripper_pos=15, left=bytes(100), right=bytes(100))
print(f"\nSensorPair frame size: {len(wire.encode_msg(pair))} bytes")

# Damaged input never crashes the decoder; it reports what broke and where.
frame = bytearray(wire.encode_msg(messages[0]))
frame[4] = 0x63  # unknown type tag
for blob in (bytes(frame), wire.encode_msg(messages[0])[:9]):
    try:
        wire.decode_msg(blob)
    except wire.ProtocolError as exc:
        print("rejected:", exc)

# The mirror speaks the same messages as one-line JSON for the browser
# console -- arrays become plain number lists.
print("\nJSON mirror form of the Electrode message:")
print(wire.to_json(messages[2]))
