"""Feature tensors and the butterfly unit's 1x1 convolutions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from splitplan.model_graph import TensorShape


class ChannelMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FeatureTensor:
    """A single (height, width, channels) feature map, row-major, channel-fastest."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ValueError(f"feature tensor must be 3-D (h, w, c), got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("feature tensor contains non-finite values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def shape(self) -> TensorShape:
        h, w, c = self.data.shape
        return TensorShape(int(h), int(w), int(c))

    @classmethod
    def from_flat(cls, shape: TensorShape, values) -> "FeatureTensor":
        values = np.asarray(values, dtype=np.float64)
        if values.size != shape.element_count:
            raise ValueError(f"expected {shape.element_count} elements, got {values.size}")
        return cls(values.reshape(shape.height, shape.width, shape.channels))

    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)


@dataclass(frozen=True, eq=False)
class Conv1x1Weights:
    """``weights`` is (out_channels, in_channels); ``bias`` is (out_channels,)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError(f"weights must be 2-D (out, in), got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise ValueError(f"bias shape {b.shape} does not match out_channels {w.shape[0]}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("weights contain non-finite values")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def random(cls, in_channels: int, out_channels: int, rng: np.random.Generator,
               bias: bool = True) -> "Conv1x1Weights":
        # He-style scaling keeps activations O(1) regardless of fan-in.
        w = rng.normal(0.0, np.sqrt(2.0 / in_channels), size=(out_channels, in_channels))
        b = rng.normal(0.0, 0.1, size=out_channels) if bias else np.zeros(out_channels)
        return cls(w, b)

    @classmethod
    def identity(cls, channels: int) -> "Conv1x1Weights":
        return cls(np.eye(channels), np.zeros(channels))


def conv1x1(x: FeatureTensor, w: Conv1x1Weights) -> FeatureTensor:
    """out[h, w, o] = sum_c W[o, c] * x[h, w, c] + bias[o]."""
    if x.shape.channels != w.in_channels:
        raise ChannelMismatchError(
            f"input has {x.shape.channels} channels, weights expect {w.in_channels}")
    return FeatureTensor(x.data @ w.weights.T + w.bias)


def load_weights(path) -> Conv1x1Weights:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    expected = {"in_channels", "out_channels", "weights", "bias"}
    if not isinstance(doc, dict) or set(doc) != expected:
        raise ValueError(f"weight file must have exactly the keys {sorted(expected)}")
    n_in, n_out = doc["in_channels"], doc["out_channels"]
    flat = np.asarray(doc["weights"], dtype=np.float64).reshape(-1)
    if flat.size != n_in * n_out:
        raise ValueError(f"weights has {flat.size} values, expected {n_out}x{n_in}")
    return Conv1x1Weights(flat.reshape(n_out, n_in), doc["bias"])


def dump_weights(w: Conv1x1Weights, path) -> None:
    doc = {
        "in_channels": w.in_channels,
        "out_channels": w.out_channels,
        "weights": w.weights.reshape(-1).tolist(),
        "bias": w.bias.tolist(),
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")
