"""Per-tensor symmetric 8-bit quantization of reduced feature maps."""

from __future__ import annotations

import numpy as np

from splitplan.model_graph import TensorShape
from splitplan.tensor_pipeline.tensor import FeatureTensor
from splitplan.tensor_pipeline.wire import FeaturePacket, to_f32

ZERO_CODE = 128
QMAX = 127


def quantize(t: FeatureTensor, partition_index: int = 0) -> FeaturePacket:
    """code = round(x / scale) + 128, clamped to [0, 255]; scale = max|x| / 127.

    The scale is rounded to binary32 before coding so the packet header
    carries exactly the step used, and nudged up when that rounding would
    push max|x| past code 255. An all-zero tensor gets scale 0.
    """
    data = t.data
    max_abs = float(np.max(np.abs(data))) if data.size else 0.0
    scale = to_f32(max_abs / QMAX)
    if scale * QMAX < max_abs:
        scale = float(np.nextafter(np.float32(scale), np.float32(np.inf)))
    shape = t.shape
    if scale == 0.0:
        codes = np.full(data.shape, ZERO_CODE, dtype=np.uint8)
    else:
        codes = np.clip(np.rint(data / scale) + ZERO_CODE, 0, 255).astype(np.uint8)
    return FeaturePacket(
        partition_index=partition_index,
        d_r=shape.channels,
        height=shape.height,
        width=shape.width,
        scale=scale,
        payload=codes.tobytes(),
    )


def dequantize(p: FeaturePacket) -> FeatureTensor:
    codes = p.codes().astype(np.float64)
    return FeatureTensor((codes - ZERO_CODE) * p.scale)


def packet_shape(p: FeaturePacket) -> TensorShape:
    return TensorShape(p.height, p.width, p.d_r)
