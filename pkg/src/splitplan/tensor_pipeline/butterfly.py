"""The butterfly unit: reduce on the mobile, ship 8-bit codes, restore on the cloud."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from splitplan.tensor_pipeline.quant import dequantize, quantize
from splitplan.tensor_pipeline.tensor import (
    ChannelMismatchError,
    Conv1x1Weights,
    FeatureTensor,
    conv1x1,
)
from splitplan.tensor_pipeline.wire import FeaturePacket, decode_packet, encode_packet


@dataclass(frozen=True)
class ButterflyConfig:
    """A bottleneck placed after one partition point."""

    partition_index: int
    reduce: Conv1x1Weights
    restore: Conv1x1Weights
    accuracy: float | None = None

    def __post_init__(self):
        _check_pair(self.reduce, self.restore)

    @property
    def d_r(self) -> int:
        return self.reduce.out_channels

    @property
    def channels(self) -> int:
        return self.reduce.in_channels

    @classmethod
    def random(cls, partition_index: int, channels: int, d_r: int,
               rng: np.random.Generator) -> "ButterflyConfig":
        return cls(partition_index,
                   Conv1x1Weights.random(channels, d_r, rng),
                   Conv1x1Weights.random(d_r, channels, rng))


def _check_pair(reduce_w: Conv1x1Weights, restore_w: Conv1x1Weights) -> None:
    if reduce_w.out_channels != restore_w.in_channels:
        raise ChannelMismatchError(
            f"reduction emits {reduce_w.out_channels} channels, "
            f"restoration expects {restore_w.in_channels}")
    if restore_w.out_channels != reduce_w.in_channels:
        raise ChannelMismatchError(
            f"restoration emits {restore_w.out_channels} channels, "
            f"input has {reduce_w.in_channels}")


def mobile_side(x: FeatureTensor, reduce_w: Conv1x1Weights,
                partition_index: int = 0) -> bytes:
    """Reduction unit plus quantization; returns the encoded packet."""
    return encode_packet(quantize(conv1x1(x, reduce_w), partition_index))


def cloud_side(packet: bytes | FeaturePacket, restore_w: Conv1x1Weights) -> FeatureTensor:
    if not isinstance(packet, FeaturePacket):
        packet = decode_packet(packet)
    return conv1x1(dequantize(packet), restore_w)


def butterfly_forward(x: FeatureTensor, reduce_w: Conv1x1Weights,
                      restore_w: Conv1x1Weights) -> FeatureTensor:
    _check_pair(reduce_w, restore_w)
    if x.shape.channels != reduce_w.in_channels:
        raise ChannelMismatchError(
            f"input has {x.shape.channels} channels, reduction expects {reduce_w.in_channels}")
    return cloud_side(quantize(conv1x1(x, reduce_w)), restore_w)


def quantization_error_bound(restore_w: Conv1x1Weights, scale: float) -> np.ndarray:
    """Per-output-channel bound on |quantized - exact| after restoration.

    Each reduced element is off by at most scale/2, so output channel o is
    off by at most sum_c |W[o, c]| * scale/2.
    """
    return np.abs(restore_w.weights).sum(axis=1) * (scale / 2)
