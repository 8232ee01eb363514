"""Model checkpoint file format (TXMD, little-endian).

Layout:

    magic   "TXMD"
    u16     format version (1)
    u16     input rows, u16 input cols
    u8      layer count, then per layer a tag byte plus dims:
              1 conv      u16 in, u16 out, u16 kernel, u16 stride, u16 pad
              2 batchnorm u16 channels
              3 relu      (no dims)
              4 flatten   u32 features
              5 linear    u32 in, u32 out
    f64[]   parameters and batchnorm running stats, declaration order:
            conv w, b; bn gamma, beta, running mean, running var; ...
            then each linear w, b
    u32     CRC32 of everything after the magic and before this field

Any structural deviation raises :class:`CheckpointError` rather than
producing a silently wrong model.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .model import ModelSpec, TiltNet

CHECKPOINT_MAGIC = b"TXMD"
CHECKPOINT_VERSION = 1

_CONV, _BATCHNORM, _RELU, _FLATTEN, _LINEAR = 1, 2, 3, 4, 5


class CheckpointError(ValueError):
    """Raised for malformed or corrupted checkpoint files."""


def _layer_entries(spec: ModelSpec) -> bytes:
    c_in, (c1, c2) = spec.in_channels, spec.conv_channels
    k = spec.kernel
    out = bytearray()
    out += struct.pack("<BHHHHH", _CONV, c_in, c1, k, 1, 1)
    out += struct.pack("<BH", _BATCHNORM, c1)
    out += struct.pack("<B", _RELU)
    out += struct.pack("<BHHHHH", _CONV, c1, c2, k, 1, 1)
    out += struct.pack("<BH", _BATCHNORM, c2)
    out += struct.pack("<B", _RELU)
    out += struct.pack("<BI", _FLATTEN, spec.flat_features)
    widths = (spec.flat_features, *spec.hidden, spec.classes)
    for i in range(4):
        out += struct.pack("<BII", _LINEAR, widths[i], widths[i + 1])
        if i < 3:
            out += struct.pack("<B", _RELU)
    return bytes(out)


def _array_order(model: TiltNet):
    """Arrays in checkpoint declaration order."""
    p, bn = model.params, model.bn_states
    for conv, norm in (("conv1", "bn1"), ("conv2", "bn2")):
        yield p[f"{conv}.w"]
        yield p[f"{conv}.b"]
        yield p[f"{norm}.gamma"]
        yield p[f"{norm}.beta"]
        yield bn[norm].running_mean
        yield bn[norm].running_var
    for i in (1, 2, 3, 4):
        yield p[f"fc{i}.w"]
        yield p[f"fc{i}.b"]


def save_model(model: TiltNet, path) -> None:
    spec = model.spec
    layers = _layer_entries(spec)
    payload = bytearray()
    payload += struct.pack("<HHH", CHECKPOINT_VERSION, *spec.input_hw)
    payload += struct.pack("<B", 14) + layers
    for arr in _array_order(model):
        payload += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload)))


def load_model(path) -> TiltNet:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: not a model checkpoint (bad magic)")
    if len(blob) < 8 + 4:
        raise CheckpointError(f"{path}: truncated checkpoint")
    payload, (stored_crc,) = blob[4:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) != stored_crc:
        raise CheckpointError(f"{path}: checksum mismatch, file is corrupted")
    version, rows, cols = struct.unpack_from("<HHH", payload, 0)
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    spec, offset = _parse_layers(payload, 6, (rows, cols), path)
    model = TiltNet(spec)
    for arr in _array_order(model):
        n = arr.size * 8
        if offset + n > len(payload):
            raise CheckpointError(f"{path}: parameter data truncated at byte {offset}")
        arr[...] = np.frombuffer(payload, dtype="<f8", count=arr.size, offset=offset).reshape(arr.shape)
        offset += n
    if offset != len(payload):
        raise CheckpointError(f"{path}: {len(payload) - offset} trailing bytes after parameters")
    return model


def _parse_layers(payload: bytes, offset: int, input_hw, path) -> tuple[ModelSpec, int]:
    try:
        (count,) = struct.unpack_from("<B", payload, offset)
        offset += 1
        convs: list[tuple[int, int, int]] = []
        norms: list[int] = []
        linears: list[tuple[int, int]] = []
        for _ in range(count):
            (tag,) = struct.unpack_from("<B", payload, offset)
            offset += 1
            if tag == _CONV:
                c_in, c_out, k, stride, pad = struct.unpack_from("<HHHHH", payload, offset)
                offset += 10
                if stride != 1 or pad != 1:
                    raise CheckpointError(f"{path}: unsupported conv stride/pad {stride}/{pad}")
                convs.append((c_in, c_out, k))
            elif tag == _BATCHNORM:
                (channels,) = struct.unpack_from("<H", payload, offset)
                offset += 2
                norms.append(channels)
            elif tag == _RELU:
                pass
            elif tag == _FLATTEN:
                offset += 4
            elif tag == _LINEAR:
                lin_in, lin_out = struct.unpack_from("<II", payload, offset)
                offset += 8
                linears.append((lin_in, lin_out))
            else:
                raise CheckpointError(f"{path}: unknown layer tag {tag}")
    except struct.error as exc:
        raise CheckpointError(f"{path}: truncated layer table ({exc})") from None
    if len(convs) != 2 or len(norms) != 2 or len(linears) != 4:
        raise CheckpointError(f"{path}: unexpected layer mix (want 2 conv + 2 bn + 4 linear)")
    spec = ModelSpec(
        in_channels=convs[0][0],
        conv_channels=(convs[0][1], convs[1][1]),
        kernel=convs[0][2],
        input_hw=input_hw,
        hidden=tuple(out for _, out in linears[:3]),
        classes=linears[3][1],
    )
    return spec, offset
