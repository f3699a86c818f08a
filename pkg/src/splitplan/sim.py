"""Deterministic discrete-event simulation of split inference.

A single mobile device issues queries; each runs its mobile share, uploads
a real encoded feature packet, and finishes on the cloud. The mobile pings
the server every ``reselect_period_ms`` and re-plans from the load it sees
then, so a query can run under a stale plan. The clock is integer
nanoseconds; per-query latency and energy come straight from the planner's
cost model.
"""

from __future__ import annotations

import heapq
import json
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal

import numpy as np

from splitplan import planner
from splitplan.model_graph import ModelProfile
from splitplan.planner import CostBreakdown, LoadState, Objective, PartitionPlan
from splitplan.tensor_pipeline import ButterflyConfig, FeatureTensor, cloud_side, mobile_side
from splitplan.tensor_pipeline.wire import HEADER_SIZE
from splitplan.wireless import Downlink, NetworkModel, uplink_time

Mode = Literal["collaborative", "cloud_only", "mobile_only"]
MODES = ("collaborative", "cloud_only", "mobile_only")

NS_PER_MS = 1_000_000

# Event kinds in per-query order.
PHASES = ("arrive", "mobile_start", "mobile_end", "upload_start", "upload_end",
          "cloud_start", "cloud_end", "result_return")


def to_ns(ms: float) -> int:
    return int(round(ms * NS_PER_MS))


@dataclass(frozen=True)
class SimConfig:
    profile: ModelProfile
    net: NetworkModel
    objective: Objective = "latency"
    query_count: int = 1
    query_interarrival_ms: float = 100.0
    # (time_ms, k_cloud) steps; k_cloud is 1.0 before the first step.
    load_schedule: tuple[tuple[float, float], ...] = ()
    k_mobile: float = 1.0
    reselect_period_ms: float = 100.0
    mode: Mode = "collaborative"
    downlink: Downlink = Downlink()
    execute_tensors: bool = True

    def __post_init__(self):
        if self.query_count < 1:
            raise ValueError("query_count must be >= 1")
        if self.query_interarrival_ms < 0:
            raise ValueError("query_interarrival_ms must be >= 0")
        if not self.reselect_period_ms > 0:
            raise ValueError("reselect_period_ms must be > 0")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.objective not in planner.OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        schedule = tuple((float(t), float(k)) for t, k in self.load_schedule)
        times = [t for t, _ in schedule]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("load_schedule times must be strictly increasing")
        if any(k < 1.0 for _, k in schedule):
            raise ValueError("load_schedule k_cloud values must be >= 1.0")
        object.__setattr__(self, "load_schedule", schedule)
        LoadState(self.k_mobile, 1.0)

    def k_cloud_at(self, t_ms: float) -> float:
        k = 1.0
        for when, value in self.load_schedule:
            if when <= t_ms:
                k = value
            else:
                break
        return k


@dataclass(frozen=True)
class SimEvent:
    time_ns: int
    query_id: int  # -1 for device-level events such as re-selection pings
    kind: str
    partition_index: int
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"time_ns": self.time_ns, "query_id": self.query_id, "event_kind": self.kind,
                "partition_index": self.partition_index, **self.detail}


@dataclass(frozen=True)
class QueryRecord:
    query_id: int
    partition_index: int
    partition_name: str
    d_r: int
    start_ns: int
    end_ns: int
    latency_ms: float
    energy_mj: float
    cost: CostBreakdown
    payload_bytes: int
    wire_bytes: int


@dataclass
class SimTrace:
    mode: Mode
    input_bytes: int
    events: list[SimEvent] = field(default_factory=list)
    queries: list[QueryRecord] = field(default_factory=list)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.as_dict(), sort_keys=True) + "\n" for e in self.events)

    def write(self, path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @property
    def total_energy(self) -> float:
        return sum(q.energy_mj for q in self.queries)


def _partition_label(cfg: SimConfig) -> tuple[int, str]:
    if cfg.mode == "cloud_only":
        return 0, "cloud-only"
    return len(cfg.profile.layers) + 1, "mobile-only"


class _Simulation:
    def __init__(self, cfg: SimConfig, seed: int):
        self.cfg = cfg
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.trace = SimTrace(cfg.mode, cfg.profile.input_bytes)
        self.queue: list = []
        self.seq = 0
        self.plan: PartitionPlan | None = None
        self.plans: dict[float, PartitionPlan] = {}
        self.butterflies: dict[tuple[int, int], ButterflyConfig] = {}
        self.waiting: list[int] = []
        self.busy = False
        self.done = 0
        self.arrivals: dict[int, int] = {}

    # -- event plumbing
    def schedule(self, time_ns: int, priority: int, action, *args) -> None:
        heapq.heappush(self.queue, (time_ns, priority, self.seq, action, args))
        self.seq += 1

    def log(self, time_ns, query_id, kind, partition_index, **detail) -> None:
        self.trace.events.append(SimEvent(time_ns, query_id, kind, partition_index, detail))

    def run(self) -> SimTrace:
        cfg = self.cfg
        if cfg.mode == "collaborative":
            self.schedule(0, 0, self.ping)
        for q in range(cfg.query_count):
            self.schedule(to_ns(q * cfg.query_interarrival_ms), 1, self.arrive, q)
        while self.queue:
            time_ns, _, _, action, args = heapq.heappop(self.queue)
            action(time_ns, *args)
        # Phases are logged when a query is scheduled; restore time order.
        self.trace.events.sort(key=lambda e: e.time_ns)
        return self.trace

    # -- re-selection
    def plan_for(self, k_cloud: float) -> PartitionPlan:
        if k_cloud not in self.plans:
            load = LoadState(self.cfg.k_mobile, k_cloud)
            self.plans[k_cloud] = planner.select(self.cfg.profile, self.cfg.net, load,
                                                 self.cfg.objective)
        return self.plans[k_cloud]

    def ping(self, now: int) -> None:
        k_cloud = self.cfg.k_cloud_at(now / NS_PER_MS)
        plan = self.plan_for(k_cloud)
        if plan is not self.plan:
            self.log(now, -1, "reselect", plan.layer_index, layer=plan.layer_name,
                     d_r=plan.d_r, k_cloud=k_cloud)
        self.plan = plan
        if self.done < self.cfg.query_count:
            self.schedule(now + to_ns(self.cfg.reselect_period_ms), 0, self.ping)

    # -- query lifecycle
    def arrive(self, now: int, q: int) -> None:
        self.arrivals[q] = now
        self.log(now, q, "arrive", 0)
        self.waiting.append(q)
        self.start_next(now)

    def start_next(self, now: int) -> None:
        if self.busy or not self.waiting:
            return
        self.busy = True
        q = self.waiting.pop(0)
        if self.cfg.mode == "collaborative":
            self.run_collaborative(now, q)
        else:
            self.run_baseline(now, q)

    def butterfly(self, plan: PartitionPlan) -> ButterflyConfig:
        key = (plan.layer_index, plan.d_r)
        if key not in self.butterflies:
            layer = self.cfg.profile.layer(plan.layer_index)
            rng = np.random.default_rng([self.seed, plan.layer_index, plan.d_r])
            self.butterflies[key] = ButterflyConfig.random(
                plan.layer_index, layer.output_shape.channels, plan.d_r, rng)
        return self.butterflies[key]

    def ship_packet(self, plan: PartitionPlan) -> int:
        """Run the butterfly unit on a synthetic feature map; returns wire bytes."""
        if not self.cfg.execute_tensors:
            return plan.payload_bytes + HEADER_SIZE
        shape = self.cfg.profile.layer(plan.layer_index).output_shape
        unit = self.butterfly(plan)
        # Post-ReLU activations are non-negative.
        x = FeatureTensor(np.maximum(self.rng.standard_normal(
            (shape.height, shape.width, shape.channels)), 0.0))
        packet = mobile_side(x, unit.reduce, plan.layer_index)
        restored = cloud_side(packet, unit.restore)
        assert restored.shape == shape
        return len(packet)

    def run_collaborative(self, start: int, q: int) -> None:
        cfg = self.cfg
        plan = self.plan
        j, d_r = plan.layer_index, plan.d_r
        wire = self.ship_packet(plan)
        if wire != plan.payload_bytes + HEADER_SIZE:
            raise AssertionError(f"packet is {wire} bytes, plan expects "
                                 f"{plan.payload_bytes + HEADER_SIZE}")
        # tm and tu do not depend on cloud load; cloud time uses the load
        # actually in effect when the cloud starts.
        pre = planner.cost_of(cfg.profile, j, d_r, cfg.net, LoadState(cfg.k_mobile, 1.0))
        mobile_end = start + to_ns(pre.tm)
        upload_end = mobile_end + to_ns(pre.tu)
        k_actual = cfg.k_cloud_at(upload_end / NS_PER_MS)
        cost = planner.cost_of(cfg.profile, j, d_r, cfg.net, LoadState(cfg.k_mobile, k_actual))
        cloud_end = upload_end + to_ns(cost.tc)
        result = cloud_end + to_ns(cfg.downlink.latency_ms)
        self.log(start, q, "mobile_start", j, layer=plan.layer_name, d_r=d_r)
        self.log(mobile_end, q, "mobile_end", j)
        self.log(mobile_end, q, "upload_start", j, wire_bytes=wire)
        self.log(upload_end, q, "upload_end", j)
        self.log(upload_end, q, "cloud_start", j, k_cloud=k_actual)
        self.log(cloud_end, q, "cloud_end", j)
        self.finish(result, q, j, plan.layer_name, d_r, start, cost,
                    plan.payload_bytes, wire)

    def run_baseline(self, start: int, q: int) -> None:
        cfg = self.cfg
        index, label = _partition_label(cfg)
        if cfg.mode == "cloud_only":
            k_cloud = cfg.k_cloud_at((start + to_ns(uplink_time(
                cfg.profile.input_bytes, cfg.net))) / NS_PER_MS)
            cost = planner.cloud_only_cost(cfg.profile, cfg.net, LoadState(cfg.k_mobile, k_cloud))
            upload_end = start + to_ns(cost.tu)
            cloud_end = upload_end + to_ns(cost.tc)
            self.log(start, q, "upload_start", index, wire_bytes=cfg.profile.input_bytes)
            self.log(upload_end, q, "upload_end", index)
            self.log(upload_end, q, "cloud_start", index, k_cloud=k_cloud)
            self.log(cloud_end, q, "cloud_end", index)
            payload = cfg.profile.input_bytes
        else:
            cost = planner.mobile_only_cost(cfg.profile, LoadState(cfg.k_mobile, 1.0))
            cloud_end = start + to_ns(cost.tm)
            self.log(start, q, "mobile_start", index)
            self.log(cloud_end, q, "mobile_end", index)
            payload = 0
        result = cloud_end + (to_ns(cfg.downlink.latency_ms) if cfg.mode == "cloud_only" else 0)
        self.finish(result, q, index, label, 0, start, cost, payload, payload)

    def finish(self, result_ns, q, index, name, d_r, start, cost, payload, wire) -> None:
        downlink = self.cfg.downlink if self.cfg.mode != "mobile_only" else Downlink()
        latency = cost.latency_total + downlink.latency_ms
        energy = cost.energy_total + downlink.energy_mj
        record = QueryRecord(q, index, name, d_r, start, result_ns, latency, energy,
                             cost, payload, wire)
        self.trace.queries.append(record)
        self.schedule(result_ns, 1, self.complete, record)

    def complete(self, now: int, record: QueryRecord) -> None:
        self.log(now, record.query_id, "result_return", record.partition_index,
                 latency_ms=record.latency_ms, energy_mj=record.energy_mj,
                 wait_ms=(record.start_ns - self.arrivals[record.query_id]) / NS_PER_MS)
        self.busy = False
        self.done += 1
        self.start_next(now)


def run(cfg: SimConfig, seed: int = 0) -> SimTrace:
    """Simulate ``cfg.query_count`` queries. Same (cfg, seed) gives the same trace.

    Raises ``planner.NoFeasiblePartition`` when no layer meets the accuracy
    threshold.
    """
    return _Simulation(cfg, seed).run()


@dataclass(frozen=True)
class SummaryReport:
    mode: str
    query_count: int
    mean_latency_ms: float
    median_latency_ms: float
    p95_latency_ms: float
    total_energy_mj: float
    mean_energy_mj: float
    partition_counts: dict
    total_payload_bytes: int
    total_wire_bytes: int
    input_bytes: int
    # Raw input bytes per offloaded payload byte, over all queries.
    compression_vs_input: float | None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def summarize(trace: SimTrace) -> SummaryReport:
    if not trace.queries:
        raise ValueError("cannot summarize an empty trace")
    latencies = [q.latency_ms for q in trace.queries]
    counts: dict[str, int] = {}
    for q in sorted(trace.queries, key=lambda r: r.partition_index):
        counts[q.partition_name] = counts.get(q.partition_name, 0) + 1
    payload = sum(q.payload_bytes for q in trace.queries)
    n = len(trace.queries)
    total_energy = sum(q.energy_mj for q in trace.queries)
    return SummaryReport(
        mode=trace.mode,
        query_count=n,
        mean_latency_ms=statistics.fmean(latencies),
        median_latency_ms=float(statistics.median(latencies)),
        p95_latency_ms=float(np.percentile(latencies, 95)),
        total_energy_mj=total_energy,
        mean_energy_mj=total_energy / n,
        partition_counts=counts,
        total_payload_bytes=payload,
        total_wire_bytes=sum(q.wire_bytes for q in trace.queries),
        input_bytes=trace.input_bytes,
        compression_vs_input=(trace.input_bytes * n / payload) if payload else None,
    )


@dataclass(frozen=True)
class ComparisonReport:
    network: str
    objective: str
    collaborative: SummaryReport
    cloud_only: SummaryReport
    mobile_only: SummaryReport
    plan: PartitionPlan

    @property
    def latency_improvement(self) -> float:
        """Cloud-only over collaborative mean latency."""
        return self.cloud_only.mean_latency_ms / self.collaborative.mean_latency_ms

    @property
    def energy_improvement(self) -> float:
        return self.cloud_only.mean_energy_mj / self.collaborative.mean_energy_mj

    def as_dict(self) -> dict:
        return {
            "network": self.network,
            "objective": self.objective,
            "plan": self.plan.as_dict(),
            "collaborative": self.collaborative.as_dict(),
            "cloud_only": self.cloud_only.as_dict(),
            "mobile_only": self.mobile_only.as_dict(),
            "latency_improvement": self.latency_improvement,
            "energy_improvement": self.energy_improvement,
        }


def compare_baselines(cfg: SimConfig, seed: int = 0) -> ComparisonReport:
    """Run collaborative, cloud-only and mobile-only under the same config."""
    collab = run(replace(cfg, mode="collaborative"), seed)
    cloud = run(replace(cfg, mode="cloud_only"), seed)
    mobile = run(replace(cfg, mode="mobile_only"), seed)
    plan = planner.select(cfg.profile, cfg.net, LoadState(cfg.k_mobile, cfg.k_cloud_at(0.0)),
                          cfg.objective)
    return ComparisonReport(cfg.net.name, cfg.objective, summarize(collab),
                            summarize(cloud), summarize(mobile), plan)


# --------------------------------------------------------------------------
# Config files

_CONFIG_KEYS = {"profile", "net", "objective", "query_count", "query_interarrival_ms",
                "load_schedule", "k_mobile", "reselect_period_ms", "mode",
                "downlink_ms", "downlink_mj", "execute_tensors"}


def config_from_document(doc: dict, profile: ModelProfile, net: NetworkModel) -> SimConfig:
    """Build a SimConfig from a parsed JSON config; ``profile``/``net`` keys are
    resolved by the caller."""
    if not isinstance(doc, dict):
        raise ValueError("simulation config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys {sorted(unknown)}")
    schedule = doc.get("load_schedule", [])
    try:
        schedule = tuple((float(step["time_ms"]), float(step["k_cloud"])) for step in schedule)
    except (TypeError, KeyError) as exc:
        raise ValueError("load_schedule entries need time_ms and k_cloud") from exc
    return SimConfig(
        profile=profile,
        net=net,
        objective=doc.get("objective", "latency"),
        query_count=int(doc.get("query_count", 1)),
        query_interarrival_ms=float(doc.get("query_interarrival_ms", 100.0)),
        load_schedule=schedule,
        k_mobile=float(doc.get("k_mobile", 1.0)),
        reselect_period_ms=float(doc.get("reselect_period_ms", 100.0)),
        mode=doc.get("mode", "collaborative"),
        downlink=Downlink(float(doc.get("downlink_ms", 0.0)), float(doc.get("downlink_mj", 0.0))),
        execute_tensors=bool(doc.get("execute_tensors", True)),
    )
