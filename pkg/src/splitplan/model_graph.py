"""Profiled DNN data model: partition points, feature geometry, cost curves
and accuracy-vs-D_r tables.

Profiles are JSON documents (``schema: 1``). Everything here is immutable
after load.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

SCHEMA_VERSION = 1
BUNDLED_PROFILE = "resnet50.profile"

# Tolerance for float noise in target - tolerance comparisons (0.76 - 0.02).
ACCURACY_EPS = 1e-12


class ProfileError(ValueError):
    """Raised when a profile cannot be parsed or fails validation.

    ``field`` names the offending location, e.g. ``layers[3].mobile_latency_ms``.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


@dataclass(frozen=True)
class TensorShape:
    height: int
    width: int
    channels: int

    def __post_init__(self):
        for name in ("height", "width", "channels"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")

    @property
    def element_count(self) -> int:
        return self.height * self.width * self.channels

    def with_channels(self, channels: int) -> "TensorShape":
        return TensorShape(self.height, self.width, channels)


@dataclass(frozen=True)
class LayerProfile:
    """One candidate partition point.

    ``mobile_latency_base`` covers every layer up to and including this point
    plus the reduction unit; ``cloud_latency_base`` covers the restoration
    unit plus all remaining layers. Both are at load 1.0.
    """

    index: int
    name: str
    output_shape: TensorShape
    mobile_latency_base: float
    mobile_power_base: float
    cloud_latency_base: float


@dataclass(frozen=True)
class AccuracyTable:
    """Sparse accuracy maps keyed by layer name.

    Lookups between stored points fall back to the largest stored D_r not
    above the query; below the first stored point the accuracy is 0.
    """

    target: float
    tolerance: float
    table: Mapping[str, Mapping[int, float]] = field(default_factory=dict)

    @property
    def threshold(self) -> float:
        return self.target - self.tolerance

    def acceptable(self, accuracy: float) -> bool:
        return accuracy >= self.threshold - ACCURACY_EPS

    def has_layer(self, name: str) -> bool:
        return name in self.table

    def lookup(self, name: str, d_r: int) -> float:
        points = self.table[name]
        best = None
        for key in points:
            if key <= d_r and (best is None or key > best):
                best = key
        return 0.0 if best is None else points[best]


@dataclass(frozen=True)
class ModelProfile:
    model_name: str
    input_bytes: int
    layers: tuple[LayerProfile, ...]
    accuracy: AccuracyTable
    mobile_only_latency: float
    mobile_only_energy: float
    # Full-network server time for the cloud-only baseline; None falls back
    # to the first partition point's cloud latency.
    cloud_only_compute: float | None = None
    notes: tuple[str, ...] = ()

    def layer(self, index: int) -> LayerProfile:
        if not 1 <= index <= len(self.layers):
            raise IndexError(f"layer index {index} outside 1..{len(self.layers)}")
        return self.layers[index - 1]

    def layer_by_name(self, name: str) -> LayerProfile:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(name)

    @property
    def cloud_only_latency(self) -> float:
        if self.cloud_only_compute is not None:
            return self.cloud_only_compute
        return self.layers[0].cloud_latency_base


def _check_dr(layer: LayerProfile, d_r: int) -> None:
    if isinstance(d_r, bool) or not isinstance(d_r, int):
        raise TypeError(f"d_r must be an integer, got {d_r!r}")
    if not 1 <= d_r <= layer.output_shape.channels:
        raise ValueError(
            f"d_r={d_r} outside 1..{layer.output_shape.channels} for {layer.name}"
        )


def offloaded_bytes(layer: LayerProfile, d_r: int) -> int:
    """Payload bytes of the reduced feature tensor (1 byte per element)."""
    _check_dr(layer, d_r)
    return layer.output_shape.height * layer.output_shape.width * d_r


def compression_ratio(layer: LayerProfile, d_r: int) -> float:
    """Channel-axis reduction factor D / D_r."""
    _check_dr(layer, d_r)
    return layer.output_shape.channels / d_r


# --------------------------------------------------------------------------
# Loading and validation

_TOP_KEYS = {"schema", "model_name", "input_bytes", "layers", "accuracy",
             "mobile_only", "cloud_only", "notes"}
_REQUIRED_TOP = _TOP_KEYS - {"cloud_only", "notes"}
_LAYER_KEYS = {"index", "name", "height", "width", "channels",
               "mobile_latency_ms", "mobile_power_mw", "cloud_latency_ms"}
_ACCURACY_KEYS = {"target", "tolerance", "table"}
_MOBILE_ONLY_KEYS = {"latency_ms", "energy_mj"}
_CLOUD_ONLY_KEYS = {"compute_ms"}


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return (isinstance(value, (int, float)) and not isinstance(value, bool)
            and math.isfinite(value))


def _check_keys(obj: Any, where: str, allowed: set, required: set, out: list) -> bool:
    if not isinstance(obj, dict):
        out.append((where, "expected an object"))
        return False
    for key in sorted(set(obj) - allowed):
        out.append((f"{where}.{key}" if where else key, "unknown key"))
    for key in sorted(required - set(obj)):
        out.append((f"{where}.{key}" if where else key, "missing key"))
    return True


def validate_document(doc: Any) -> list[tuple[str, str]]:
    """Check a parsed profile document; returns ``(field, message)`` pairs.

    An empty list means the document is clean. Checks are collected rather
    than short-circuited so ``validate`` can report every problem at once.
    """
    problems: list[tuple[str, str]] = []
    if not _check_keys(doc, "", _TOP_KEYS, _REQUIRED_TOP, problems):
        return problems

    if "schema" in doc and doc["schema"] != SCHEMA_VERSION:
        problems.append(("schema", f"unsupported schema {doc['schema']!r}, expected {SCHEMA_VERSION}"))
    if "model_name" in doc and not isinstance(doc["model_name"], str):
        problems.append(("model_name", "must be a string"))
    if "input_bytes" in doc and not (_is_int(doc["input_bytes"]) and doc["input_bytes"] > 0):
        problems.append(("input_bytes", "must be a positive integer"))
    if "notes" in doc and not (isinstance(doc["notes"], list)
                               and all(isinstance(n, str) for n in doc["notes"])):
        problems.append(("notes", "must be a list of strings"))

    layer_names: list[str] = []
    layers = doc.get("layers")
    if "layers" in doc:
        if not isinstance(layers, list):
            problems.append(("layers", "must be a list"))
            layers = []
        elif not layers:
            problems.append(("layers", "must be non-empty"))
        prev_latency = None
        for pos, layer in enumerate(layers):
            where = f"layers[{pos}]"
            if not _check_keys(layer, where, _LAYER_KEYS, _LAYER_KEYS, problems):
                continue
            if layer.get("index") != pos + 1:
                problems.append((f"{where}.index",
                                 f"expected {pos + 1} (indices must be contiguous 1..M), got {layer.get('index')!r}"))
            name = layer.get("name")
            if not isinstance(name, str) or not name:
                problems.append((f"{where}.name", "must be a non-empty string"))
            elif name in layer_names:
                problems.append((f"{where}.name", f"duplicate layer name {name!r}"))
            else:
                layer_names.append(name)
            for key in ("height", "width", "channels"):
                if key in layer and not (_is_int(layer[key]) and layer[key] >= 1):
                    problems.append((f"{where}.{key}", "must be an integer >= 1"))
            for key in ("mobile_latency_ms", "mobile_power_mw", "cloud_latency_ms"):
                if key in layer and not (_is_number(layer[key]) and layer[key] > 0):
                    problems.append((f"{where}.{key}", "must be a positive number"))
            latency = layer.get("mobile_latency_ms")
            if _is_number(latency):
                if prev_latency is not None and latency <= prev_latency:
                    problems.append((f"{where}.mobile_latency_ms",
                                     f"cumulative mobile latency must strictly increase "
                                     f"({latency} <= {prev_latency})"))
                prev_latency = latency

    accuracy = doc.get("accuracy")
    if "accuracy" in doc and _check_keys(accuracy, "accuracy", _ACCURACY_KEYS,
                                         _ACCURACY_KEYS, problems):
        for key in ("target", "tolerance"):
            value = accuracy.get(key)
            if key in accuracy and not (_is_number(value) and 0 <= value <= 1):
                problems.append((f"accuracy.{key}", "must be a fraction in [0, 1]"))
        table = accuracy.get("table")
        if "table" in accuracy and not isinstance(table, dict):
            problems.append(("accuracy.table", "must be an object"))
        elif isinstance(table, dict):
            channels = {layer.get("name"): layer.get("channels")
                        for layer in (layers or []) if isinstance(layer, dict)}
            for name, points in table.items():
                where = f"accuracy.table.{name}"
                if layers is not None and name not in channels:
                    problems.append((where, "no layer with this name"))
                if not isinstance(points, dict) or not points:
                    problems.append((where, "must be a non-empty object of d_r -> accuracy"))
                    continue
                parsed = []
                for key, value in points.items():
                    try:
                        d_r = int(key)
                    except (TypeError, ValueError):
                        problems.append((f"{where}.{key}", "d_r key must be an integer"))
                        continue
                    limit = channels.get(name)
                    if d_r < 1 or (_is_int(limit) and d_r > limit):
                        problems.append((f"{where}.{key}", f"d_r outside 1..{limit}"))
                    if not (_is_number(value) and 0 <= value <= 1):
                        problems.append((f"{where}.{key}", "accuracy must be in [0, 1]"))
                        continue
                    parsed.append((d_r, value))
                parsed.sort()
                for (d_lo, a_lo), (d_hi, a_hi) in zip(parsed, parsed[1:]):
                    if a_hi < a_lo:
                        problems.append((f"{where}.{d_hi}",
                                         f"accuracy not monotone in d_r: d_r={d_lo} -> {a_lo}, "
                                         f"d_r={d_hi} -> {a_hi}"))

    for block, keys in (("mobile_only", _MOBILE_ONLY_KEYS), ("cloud_only", _CLOUD_ONLY_KEYS)):
        if block not in doc:
            continue
        obj = doc[block]
        if _check_keys(obj, block, keys, keys, problems):
            for key in keys:
                if key in obj and not (_is_number(obj[key]) and obj[key] > 0):
                    problems.append((f"{block}.{key}", "must be a positive number"))
    return problems


def profile_from_document(doc: Any) -> ModelProfile:
    problems = validate_document(doc)
    if problems:
        where, message = problems[0]
        raise ProfileError(where, message)
    layers = tuple(
        LayerProfile(
            index=layer["index"],
            name=layer["name"],
            output_shape=TensorShape(layer["height"], layer["width"], layer["channels"]),
            mobile_latency_base=float(layer["mobile_latency_ms"]),
            mobile_power_base=float(layer["mobile_power_mw"]),
            cloud_latency_base=float(layer["cloud_latency_ms"]),
        )
        for layer in doc["layers"]
    )
    acc = doc["accuracy"]
    table = {
        name: {int(k): float(v) for k, v in points.items()}
        for name, points in acc["table"].items()
    }
    cloud_only = doc.get("cloud_only")
    return ModelProfile(
        model_name=doc["model_name"],
        input_bytes=doc["input_bytes"],
        layers=layers,
        accuracy=AccuracyTable(float(acc["target"]), float(acc["tolerance"]), table),
        mobile_only_latency=float(doc["mobile_only"]["latency_ms"]),
        mobile_only_energy=float(doc["mobile_only"]["energy_mj"]),
        cloud_only_compute=None if cloud_only is None else float(cloud_only["compute_ms"]),
        notes=tuple(doc.get("notes", ())),
    )


def read_document(path) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError("<document>", f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_profile(path) -> ModelProfile:
    """Load and validate a profile file. Raises ``ProfileError`` on bad data."""
    return profile_from_document(read_document(path))


def bundled_profile_path() -> Path:
    return Path(str(resources.files("splitplan.data") / BUNDLED_PROFILE))


def load_bundled_profile() -> ModelProfile:
    return load_profile(bundled_profile_path())


def profile_to_document(profile: ModelProfile) -> dict:
    doc: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "model_name": profile.model_name,
        "input_bytes": profile.input_bytes,
    }
    if profile.notes:
        doc["notes"] = list(profile.notes)
    doc["layers"] = [
        {
            "index": layer.index,
            "name": layer.name,
            "height": layer.output_shape.height,
            "width": layer.output_shape.width,
            "channels": layer.output_shape.channels,
            "mobile_latency_ms": layer.mobile_latency_base,
            "mobile_power_mw": layer.mobile_power_base,
            "cloud_latency_ms": layer.cloud_latency_base,
        }
        for layer in profile.layers
    ]
    doc["accuracy"] = {
        "target": profile.accuracy.target,
        "tolerance": profile.accuracy.tolerance,
        "table": {
            name: {str(k): v for k, v in sorted(points.items())}
            for name, points in profile.accuracy.table.items()
        },
    }
    doc["mobile_only"] = {
        "latency_ms": profile.mobile_only_latency,
        "energy_mj": profile.mobile_only_energy,
    }
    if profile.cloud_only_compute is not None:
        doc["cloud_only"] = {"compute_ms": profile.cloud_only_compute}
    return doc


def dump_profile(profile: ModelProfile, path) -> None:
    Path(path).write_text(json.dumps(profile_to_document(profile), indent=2) + "\n",
                          encoding="utf-8")
