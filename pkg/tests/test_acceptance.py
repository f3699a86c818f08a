"""Acceptance gate: one test per criterion, summarized as PASS/FAIL lines at the end of the run."""

import math
import time

import numpy as np
import pytest

from splitplan.cli import table4_rows
from splitplan.model_graph import compression_ratio, offloaded_bytes
from splitplan.planner import (
    LoadState,
    NoFeasiblePartition,
    cloud_only_cost,
    cost_of,
    select,
    select_bruteforce,
)
from splitplan.sim import SimConfig, compare_baselines, run
from splitplan.tensor_pipeline import (
    BadMagicError,
    Conv1x1Weights,
    FeaturePacket,
    FeatureTensor,
    GeometryMismatchError,
    TruncatedPacketError,
    UnsupportedVersionError,
    butterfly_forward,
    conv1x1,
    decode_packet,
    dequantize,
    encode_packet,
    quantization_error_bound,
    quantize,
)
from splitplan.wireless import ordered, uplink_time

from helpers import random_network, random_profile

pytestmark = pytest.mark.acceptance

NETS = ("3G", "4G", "WiFi")


def test_criterion_01_selection(profile, nets):
    expected = {"3G": ("RB8", 5), "4G": ("RB1", 1), "WiFi": ("RB1", 1)}
    start = time.perf_counter()
    got = {(net, obj): select(profile, nets[net], LoadState(1, 1), obj)
           for net in NETS for obj in ("latency", "energy")}
    elapsed = time.perf_counter() - start
    for (net, _), plan in got.items():
        assert (plan.layer_name, plan.d_r) == expected[net]
    assert elapsed < 1.0


def test_criterion_02_offloaded_sizes(profile):
    rows = table4_rows(profile, [], LoadState())
    sizes = [row["offloaded_bytes"] for row in rows]
    assert sizes == [3136] * 3 + [1568] * 4 + [980] * 6 + [490] * 3
    assert [f"{row['offloaded_kb']:.1f}" for row in rows] == \
        ["3.1"] * 3 + ["1.6"] * 4 + ["1.0"] * 6 + ["0.5"] * 3


def test_criterion_03_cloud_only(profile, nets):
    assert uplink_time(150528, nets["3G"]) == pytest.approx(1094.749090909091, rel=1e-12)
    assert uplink_time(150528, nets["4G"]) == pytest.approx(205.8502564102564, rel=1e-12)
    costs = {net: cloud_only_cost(profile, nets[net]) for net in NETS}
    assert costs["3G"].latency_total == pytest.approx(1101, rel=0.01)
    assert costs["4G"].latency_total == pytest.approx(208.4, rel=0.02)
    for attr in ("latency_total", "energy_total"):
        wifi, g4, g3 = (getattr(costs[n], attr) for n in ("WiFi", "4G", "3G"))
        assert wifi < g4 < g3


def test_criterion_04_improvement(profile, nets):
    ratios = {net: compare_baselines(SimConfig(profile, nets[net])).latency_improvement
              for net in NETS}
    assert ratios["3G"] == pytest.approx(77, rel=0.10)
    assert sum(ratios.values()) / len(ratios) == pytest.approx(53, rel=0.15)


def test_criterion_05_oracle_equivalence():
    start = time.perf_counter()
    checked = 0
    for seed in range(200):
        prof = random_profile(seed)
        net = random_network(10_000 + seed)
        objective = ("latency", "energy")[seed % 2]
        try:
            plan = select(prof, net, objective=objective)
        except NoFeasiblePartition:
            with pytest.raises(NoFeasiblePartition):
                select_bruteforce(prof, net, objective=objective, min_dr_only=True)
            continue
        brute = select_bruteforce(prof, net, objective=objective, min_dr_only=True)
        assert (brute.layer_index, brute.d_r) == (plan.layer_index, plan.d_r)
        assert brute.value == pytest.approx(plan.value, rel=1e-12)
        checked += 1
    assert checked >= 100
    assert time.perf_counter() - start < 10.0


def test_criterion_06_monotone_under_load(profile, nets):
    for net in ordered(nets.values()):
        picks = [select(profile, net, LoadState(1, k)).layer_index for k in (1, 2, 4, 8, 16)]
        assert picks == sorted(picks), (net.name, picks)


def naive_conv(x, w, b):
    h, wd, _ = x.shape
    out = np.empty((h, wd, w.shape[0]))
    for i in range(h):
        for j in range(wd):
            out[i, j] = [b[o] + sum(w[o, k] * x[i, j, k] for k in range(x.shape[2]))
                         for o in range(w.shape[0])]
    return out


def test_criterion_07_tensor_numerics():
    rng = np.random.default_rng(7)
    for _ in range(100):
        h, w, cin, cout = (int(v) for v in rng.integers(1, 7, size=4))
        x = rng.normal(size=(h, w, cin))
        weights = Conv1x1Weights(rng.normal(size=(cout, cin)), rng.normal(size=cout))
        want = naive_conv(x, weights.weights, weights.bias)
        got = conv1x1(FeatureTensor(x), weights).data
        np.testing.assert_allclose(got, want, rtol=1e-6, atol=1e-12)
    for _ in range(1000):
        shape = tuple(int(v) for v in rng.integers(1, 9, size=3))
        x = rng.normal(size=shape) * 10 ** rng.uniform(-3, 3)
        p = quantize(FeatureTensor(x))
        assert np.all(np.abs(dequantize(p).data - x) <= p.scale / 2 * (1 + 1e-12))
    for _ in range(50):
        d = int(rng.integers(2, 33))
        d_r = int(rng.integers(1, d + 1))
        x = FeatureTensor(rng.normal(size=(int(rng.integers(1, 9)), int(rng.integers(1, 9)), d)))
        reduce_w = Conv1x1Weights.random(d, d_r, rng)
        restore_w = Conv1x1Weights.random(d_r, d, rng)
        reduced = conv1x1(x, reduce_w)
        exact = conv1x1(reduced, restore_w).data
        bound = quantization_error_bound(restore_w, quantize(reduced).scale)
        got = butterfly_forward(x, reduce_w, restore_w).data
        assert np.all(np.abs(got - exact) <= bound * (1 + 1e-9) + 1e-12)


def test_criterion_08_wire_codec():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        h, w, d = (int(v) for v in rng.integers(1, 12, size=3))
        scale = float(np.float32(rng.uniform(1e-4, 10)))
        payload = rng.integers(0, 256, size=h * w * d, dtype=np.uint8).tobytes()
        p = FeaturePacket(int(rng.integers(0, 256)), d, h, w, scale, payload)
        data = encode_packet(p)
        assert decode_packet(data) == p
        assert encode_packet(decode_packet(data)) == data
    rb1 = encode_packet(quantize(FeatureTensor(rng.normal(size=(56, 56, 1))), partition_index=1))
    assert len(rb1) == 3152
    cases = [
        (b"ABCD" + rb1[4:], BadMagicError),
        (rb1[:4] + bytes([9]) + rb1[5:], UnsupportedVersionError),
        (rb1[:-5], TruncatedPacketError),
        (rb1 + b"\x00", GeometryMismatchError),
    ]
    for data, error in cases:
        with pytest.raises(error):
            decode_packet(data)
    assert len({error for _, error in cases}) == 4


def test_criterion_09_simulator(profile, nets):
    cfg = SimConfig(profile, nets["4G"], query_count=30, query_interarrival_ms=4,
                    load_schedule=((40.0, 8.0),), reselect_period_ms=10)
    assert run(cfg, seed=3).to_jsonl().encode() == run(cfg, seed=3).to_jsonl().encode()
    for net in NETS:
        (q,) = run(SimConfig(profile, nets[net])).queries
        expected = cost_of(profile, q.partition_index, q.d_r, nets[net]).latency_total
        assert abs(q.latency_ms - expected) <= 1e-9


def test_criterion_10_compression(profile):
    rb1 = profile.layer(1)
    assert compression_ratio(rb1, 1) == 256
    input_to_wire = profile.input_bytes / offloaded_bytes(rb1, 1)
    assert math.isclose(input_to_wire, 48.0)
    row = table4_rows(profile, [], LoadState())[0]
    assert row["compression_ratio"] == 256
    assert profile.input_bytes / row["offloaded_bytes"] == 48.0
