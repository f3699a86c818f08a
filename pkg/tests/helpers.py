"""Profile and network generators shared by the tests."""

import random

from splitplan.model_graph import AccuracyTable, LayerProfile, ModelProfile, TensorShape
from splitplan.wireless import NetworkModel


def make_profile(layers, table, target=0.76, tolerance=0.02, name="toy"):
    """layers: list of (h, w, c, tm, pm, tc)."""
    built = tuple(
        LayerProfile(i + 1, f"L{i + 1}", TensorShape(h, w, c), tm, pm, tc)
        for i, (h, w, c, tm, pm, tc) in enumerate(layers)
    )
    return ModelProfile(
        model_name=name,
        input_bytes=150528,
        layers=built,
        accuracy=AccuracyTable(target, tolerance, table),
        mobile_only_latency=20.0,
        mobile_only_energy=30.0,
    )


def random_profile(seed, max_layers=16, max_channels=48, feasible_rate=0.8):
    """Random chain profile with monotone sparse accuracy tables."""
    r = random.Random(seed)
    m = r.randint(1, max_layers)
    layers, table = [], {}
    tm = 0.0
    for i in range(m):
        tm += r.uniform(0.05, 3.0)
        h = w = r.choice([2, 4, 7, 14, 28])
        c = r.randint(1, max_channels)
        layers.append((h, w, c, round(tm, 6), r.uniform(500, 5000), r.uniform(0.01, 5.0)))
        keys = sorted(r.sample(range(1, c + 1), r.randint(1, min(c, 6))))
        acc = sorted(r.uniform(0.5, 0.8) for _ in keys)
        if r.random() > feasible_rate:
            acc = [min(a, 0.73) for a in acc]
        table[f"L{i + 1}"] = dict(zip(keys, acc))
    return make_profile(layers, table, name=f"random-{seed}")


def random_network(seed):
    r = random.Random(seed)
    return NetworkModel(f"net{seed}", r.uniform(0.5, 50.0), r.uniform(0, 1000), r.uniform(0, 2000))
