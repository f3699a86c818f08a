from splitplan.tensor_pipeline.butterfly import (
    ButterflyConfig,
    butterfly_forward,
    cloud_side,
    mobile_side,
    quantization_error_bound,
)
from splitplan.tensor_pipeline.quant import dequantize, quantize
from splitplan.tensor_pipeline.tensor import (
    ChannelMismatchError,
    Conv1x1Weights,
    FeatureTensor,
    conv1x1,
    dump_weights,
    load_weights,
)
from splitplan.tensor_pipeline.wire import (
    HEADER_SIZE,
    BadMagicError,
    FeaturePacket,
    GeometryMismatchError,
    PacketError,
    TruncatedPacketError,
    UnsupportedVersionError,
    decode_packet,
    encode_packet,
)

__all__ = [
    "ButterflyConfig", "butterfly_forward", "cloud_side", "mobile_side",
    "quantization_error_bound", "dequantize", "quantize", "ChannelMismatchError",
    "Conv1x1Weights", "FeatureTensor", "conv1x1", "dump_weights", "load_weights",
    "HEADER_SIZE", "BadMagicError", "FeaturePacket", "GeometryMismatchError",
    "PacketError", "TruncatedPacketError", "UnsupportedVersionError",
    "decode_packet", "encode_packet",
]
