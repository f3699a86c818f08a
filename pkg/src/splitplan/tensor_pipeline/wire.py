"""Bit-exact framing for quantized feature packets.

Layout (little-endian)::

    0-3   magic b"BFLY"
    4     version (1)
    5     partition index (u8)
    6-7   d_r (u16)
    8-9   height (u16)
    10-11 width (u16)
    12-15 scale (binary32)
    16-   payload, one u8 code per element, channel-fastest in (h, w) order
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"BFLY"
VERSION = 1
HEADER = struct.Struct("<4sBBHHHf")
HEADER_SIZE = HEADER.size  # 16


class PacketError(ValueError):
    pass


class BadMagicError(PacketError):
    pass


class UnsupportedVersionError(PacketError):
    pass


class TruncatedPacketError(PacketError):
    pass


class GeometryMismatchError(PacketError):
    pass


def to_f32(value: float) -> float:
    """Round a float to the nearest binary32 value."""
    return struct.unpack("<f", struct.pack("<f", value))[0]


@dataclass(frozen=True, eq=False)
class FeaturePacket:
    partition_index: int
    d_r: int
    height: int
    width: int
    scale: float
    payload: bytes

    def __post_init__(self):
        if not 0 <= self.partition_index <= 0xFF:
            raise ValueError(f"partition_index {self.partition_index} does not fit in u8")
        for name in ("d_r", "height", "width"):
            value = getattr(self, name)
            if not 1 <= value <= 0xFFFF:
                raise ValueError(f"{name}={value} outside 1..65535")
        payload = bytes(self.payload)
        object.__setattr__(self, "payload", payload)
        if len(payload) != self.element_count:
            raise GeometryMismatchError(
                f"payload has {len(payload)} bytes, geometry needs {self.element_count}")
        if not math.isfinite(self.scale) or self.scale < 0:
            raise ValueError(f"scale must be finite and >= 0, got {self.scale}")
        if self.scale == 0 and any(b != 128 for b in payload):
            raise ValueError("scale 0 is only valid for an all-zero tensor")
        if to_f32(self.scale) != self.scale:
            raise ValueError("scale must be representable as binary32")

    @property
    def element_count(self) -> int:
        return self.height * self.width * self.d_r

    def codes(self) -> np.ndarray:
        return np.frombuffer(self.payload, dtype=np.uint8).reshape(
            self.height, self.width, self.d_r)

    def __eq__(self, other):
        if not isinstance(other, FeaturePacket):
            return NotImplemented
        return (self.partition_index, self.d_r, self.height, self.width,
                self.scale, self.payload) == (
                other.partition_index, other.d_r, other.height, other.width,
                other.scale, other.payload)

    __hash__ = None


def encode_packet(p: FeaturePacket) -> bytes:
    header = HEADER.pack(MAGIC, VERSION, p.partition_index, p.d_r, p.height, p.width, p.scale)
    return header + p.payload


def decode_packet(buf: bytes) -> FeaturePacket:
    buf = bytes(buf)
    if buf[:4] != MAGIC[:len(buf)]:
        raise BadMagicError(f"bad magic {buf[:4]!r}")
    if len(buf) < HEADER_SIZE:
        raise TruncatedPacketError(f"header needs {HEADER_SIZE} bytes, got {len(buf)}")
    magic, version, index, d_r, height, width, scale = HEADER.unpack_from(buf)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    if 0 in (d_r, height, width):
        raise GeometryMismatchError(f"zero dimension in geometry ({height}, {width}, {d_r})")
    need = height * width * d_r
    have = len(buf) - HEADER_SIZE
    if have < need:
        raise TruncatedPacketError(f"payload truncated: {have} of {need} bytes")
    if have > need:
        raise GeometryMismatchError(f"payload has {have} bytes, geometry needs {need}")
    try:
        return FeaturePacket(index, d_r, height, width, scale, buf[HEADER_SIZE:])
    except ValueError as exc:
        raise PacketError(f"invalid packet: {exc}") from exc
