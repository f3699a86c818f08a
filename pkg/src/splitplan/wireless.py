"""Wireless uplink models: transfer time and the linear power regression
P_u = alpha_u * t_u + beta (mW, with t_u in Mbps)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

BUNDLED_ORDER = ("3G", "4G", "WiFi")


@dataclass(frozen=True)
class NetworkModel:
    name: str
    uplink_mbps: float
    alpha_u: float  # mW per Mbps
    beta: float  # mW

    def __post_init__(self):
        if not (math.isfinite(self.uplink_mbps) and self.uplink_mbps > 0):
            raise ValueError(f"{self.name}: uplink_mbps must be > 0")
        if not (math.isfinite(self.alpha_u) and self.alpha_u >= 0):
            raise ValueError(f"{self.name}: alpha_u must be >= 0")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"{self.name}: beta must be >= 0")


def uplink_time(nbytes: int, net: NetworkModel) -> float:
    """Milliseconds to push ``nbytes`` over the uplink at a constant rate."""
    if nbytes < 0:
        raise ValueError("byte count must be >= 0")
    return nbytes * 8 / (net.uplink_mbps * 1e6) * 1000


def uplink_power(net: NetworkModel) -> float:
    return net.alpha_u * net.uplink_mbps + net.beta


def uplink_energy(nbytes: int, net: NetworkModel) -> float:
    """Millijoules spent transmitting; power is charged for the whole transfer."""
    return uplink_time(nbytes, net) / 1000 * uplink_power(net)


@dataclass(frozen=True)
class Downlink:
    """Fixed cost of returning the inference result to the mobile.

    Zero by default, which matches the selection objectives.
    """

    latency_ms: float = 0.0
    energy_mj: float = 0.0


_KEYS = {"name", "uplink_mbps", "alpha_u_mw_per_mbps", "beta_mw"}


def networks_from_document(doc) -> list[NetworkModel]:
    if isinstance(doc, dict):
        doc = [doc]
    if not isinstance(doc, list) or not doc:
        raise ValueError("network definitions must be a non-empty array of objects")
    nets = []
    for pos, item in enumerate(doc):
        if not isinstance(item, dict):
            raise ValueError(f"networks[{pos}]: expected an object")
        extra = set(item) - _KEYS
        missing = _KEYS - set(item)
        if extra:
            raise ValueError(f"networks[{pos}]: unknown keys {sorted(extra)}")
        if missing:
            raise ValueError(f"networks[{pos}]: missing keys {sorted(missing)}")
        nets.append(NetworkModel(
            name=str(item["name"]),
            uplink_mbps=float(item["uplink_mbps"]),
            alpha_u=float(item["alpha_u_mw_per_mbps"]),
            beta=float(item["beta_mw"]),
        ))
    return nets


def load_networks(path) -> list[NetworkModel]:
    return networks_from_document(json.loads(Path(path).read_text(encoding="utf-8")))


def networks_to_document(nets) -> list[dict]:
    return [
        {"name": n.name, "uplink_mbps": n.uplink_mbps,
         "alpha_u_mw_per_mbps": n.alpha_u, "beta_mw": n.beta}
        for n in nets
    ]


def bundled_networks() -> dict[str, NetworkModel]:
    text = (resources.files("splitplan.data") / "networks.json").read_text(encoding="utf-8")
    return {net.name: net for net in networks_from_document(json.loads(text))}


def ordered(nets) -> list[NetworkModel]:
    """3G, 4G, WiFi first, then anything else alphabetically."""
    def key(net):
        if net.name in BUNDLED_ORDER:
            return (0, BUNDLED_ORDER.index(net.name), "")
        return (1, 0, net.name)
    return sorted(nets, key=key)


def resolve_network(spec: str) -> list[NetworkModel]:
    """Resolve a bundled network name (case-insensitive, ``Wi-Fi`` accepted)
    or a path to a network definitions file."""
    bundled = bundled_networks()
    wanted = spec.replace("-", "").lower()
    for name, net in bundled.items():
        if name.lower() == wanted:
            return [net]
    path = Path(spec)
    if path.exists():
        return load_networks(path)
    raise LookupError(f"unknown network {spec!r}: not a bundled name "
                      f"({', '.join(bundled)}) or an existing file")
