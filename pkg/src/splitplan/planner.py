"""Partition planning: minimum D_r search, cost aggregation under load, and
objective-minimizing split selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from splitplan.model_graph import LayerProfile, ModelProfile, offloaded_bytes
from splitplan.tensor_pipeline.wire import HEADER_SIZE
from splitplan.wireless import NetworkModel, uplink_power, uplink_time

Objective = Literal["latency", "energy"]
OBJECTIVES = ("latency", "energy")


class PlanningError(Exception):
    pass


class NoFeasiblePartition(PlanningError):
    def __init__(self, model_name: str):
        super().__init__(f"no feasible partition: no layer of {model_name} reaches "
                         f"the accuracy threshold")


class MissingAccuracyTable(PlanningError):
    pass


@dataclass(frozen=True)
class LoadState:
    k_mobile: float = 1.0
    k_cloud: float = 1.0

    def __post_init__(self):
        if not self.k_mobile >= 1.0 or not self.k_cloud >= 1.0:
            raise ValueError(f"load multipliers must be >= 1.0, got "
                             f"k_mobile={self.k_mobile}, k_cloud={self.k_cloud}")


BASELINE_LOAD = LoadState()


@dataclass(frozen=True)
class CostBreakdown:
    tm: float
    tu: float
    tc: float
    pm: float
    pu: float

    @property
    def latency_total(self) -> float:
        return self.tm + self.tu + self.tc

    @property
    def energy_total(self) -> float:
        return self.tm * self.pm / 1000 + self.tu * self.pu / 1000

    def value(self, objective: Objective) -> float:
        if objective == "latency":
            return self.latency_total
        if objective == "energy":
            return self.energy_total
        raise ValueError(f"unknown objective {objective!r}")

    def as_dict(self) -> dict:
        return {"tm_ms": self.tm, "tu_ms": self.tu, "tc_ms": self.tc,
                "pm_mw": self.pm, "pu_mw": self.pu,
                "latency_ms": self.latency_total, "energy_mj": self.energy_total}


@dataclass(frozen=True)
class PartitionPlan:
    layer_index: int
    layer_name: str
    d_r: int
    accuracy: float
    cost: CostBreakdown
    objective: Objective
    payload_bytes: int

    @property
    def value(self) -> float:
        return self.cost.value(self.objective)

    def as_dict(self) -> dict:
        return {"layer_index": self.layer_index, "layer_name": self.layer_name,
                "d_r": self.d_r, "accuracy": self.accuracy,
                "objective": self.objective, "payload_bytes": self.payload_bytes,
                "wire_bytes": self.payload_bytes + HEADER_SIZE,
                **self.cost.as_dict()}


def scale_latency(base_ms: float, k: float) -> float:
    """Latency under load multiplier k. Linear; the one place to swap the model."""
    return base_ms * k


def min_dr(profile: ModelProfile, layer_index: int) -> int | None:
    """Smallest D_r reaching target - tolerance at this layer, or None."""
    layer = profile.layer(layer_index)
    acc = profile.accuracy
    if not acc.has_layer(layer.name):
        raise MissingAccuracyTable(f"no accuracy table for {layer.name}")
    for k in range(1, layer.output_shape.channels + 1):
        if acc.acceptable(acc.lookup(layer.name, k)):
            return k
    return None


def cost_of(profile: ModelProfile, layer_index: int, d_r: int, net: NetworkModel,
            load: LoadState = BASELINE_LOAD) -> CostBreakdown:
    layer = profile.layer(layer_index)
    wire = offloaded_bytes(layer, d_r) + HEADER_SIZE
    return CostBreakdown(
        tm=scale_latency(layer.mobile_latency_base, load.k_mobile),
        tu=uplink_time(wire, net),
        tc=scale_latency(layer.cloud_latency_base, load.k_cloud),
        pm=layer.mobile_power_base,
        pu=uplink_power(net),
    )


def _plan(profile, layer: LayerProfile, d_r, net, load, objective) -> PartitionPlan:
    return PartitionPlan(
        layer_index=layer.index,
        layer_name=layer.name,
        d_r=d_r,
        accuracy=profile.accuracy.lookup(layer.name, d_r),
        cost=cost_of(profile, layer.index, d_r, net, load),
        objective=objective,
        payload_bytes=offloaded_bytes(layer, d_r),
    )


def candidate_plans(profile: ModelProfile, net: NetworkModel,
                    load: LoadState = BASELINE_LOAD,
                    objective: Objective = "latency") -> list[PartitionPlan]:
    """One plan per feasible layer, each at that layer's minimum D_r."""
    plans = []
    for layer in profile.layers:
        d_r = min_dr(profile, layer.index)
        if d_r is not None:
            plans.append(_plan(profile, layer, d_r, net, load, objective))
    return plans


def select(profile: ModelProfile, net: NetworkModel, load: LoadState = BASELINE_LOAD,
           objective: Objective = "latency") -> PartitionPlan:
    """Best partition for the objective; ties go to the shallower cut."""
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    best = None
    for plan in candidate_plans(profile, net, load, objective):
        if best is None or plan.value < best.value:
            best = plan
    if best is None:
        raise NoFeasiblePartition(profile.model_name)
    return best


def select_bruteforce(profile: ModelProfile, net: NetworkModel,
                      load: LoadState = BASELINE_LOAD, objective: Objective = "latency",
                      min_dr_only: bool = False) -> PartitionPlan:
    """Exhaustive search over every accuracy-feasible (layer, D_r) pair.

    Test oracle: it recomputes costs from the raw profile fields instead of
    going through ``cost_of``. With ``min_dr_only`` each layer contributes
    only its smallest feasible D_r.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    acc = profile.accuracy
    threshold = acc.target - acc.tolerance
    pu = net.alpha_u * net.uplink_mbps + net.beta
    best = None
    for layer in profile.layers:
        points = acc.table[layer.name]
        h, w = layer.output_shape.height, layer.output_shape.width
        for d_r in range(1, layer.output_shape.channels + 1):
            stored = [k for k in points if k <= d_r]
            achieved = points[max(stored)] if stored else 0.0
            if achieved < threshold - 1e-12:
                continue
            tm = layer.mobile_latency_base * load.k_mobile
            tc = layer.cloud_latency_base * load.k_cloud
            tu = (h * w * d_r + 16) * 8 / (net.uplink_mbps * 1e6) * 1000
            if objective == "latency":
                value = tm + tu + tc
            else:
                value = tm * layer.mobile_power_base / 1000 + tu * pu / 1000
            if best is None or value < best[0]:
                best = (value, layer, d_r)
            if min_dr_only:
                break
    if best is None:
        raise NoFeasiblePartition(profile.model_name)
    _, layer, d_r = best
    return _plan(profile, layer, d_r, net, load, objective)


def cloud_only_cost(profile: ModelProfile, net: NetworkModel,
                    load: LoadState = BASELINE_LOAD) -> CostBreakdown:
    """Raw input uploaded as-is, whole network on the server."""
    return CostBreakdown(
        tm=0.0,
        tu=uplink_time(profile.input_bytes, net),
        tc=scale_latency(profile.cloud_only_latency, load.k_cloud),
        pm=0.0,
        pu=uplink_power(net),
    )


def mobile_only_cost(profile: ModelProfile, load: LoadState = BASELINE_LOAD) -> CostBreakdown:
    tm = scale_latency(profile.mobile_only_latency, load.k_mobile)
    # Average power implied by the profiled mobile-only run.
    pm = profile.mobile_only_energy / profile.mobile_only_latency * 1000
    return CostBreakdown(tm=tm, tu=0.0, tc=0.0, pm=pm, pu=0.0)
