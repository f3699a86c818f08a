import pytest
from hypothesis import given, settings, strategies as st

from splitplan.planner import (
    LoadState,
    MissingAccuracyTable,
    NoFeasiblePartition,
    candidate_plans,
    cost_of,
    min_dr,
    select,
    select_bruteforce,
)

from helpers import make_profile, random_network, random_profile

PAPER_DR = [1] * 3 + [2] * 4 + [5] * 6 + [10] * 3


def test_min_dr_bundled(profile):
    assert [min_dr(profile, j) for j in range(1, 17)] == PAPER_DR


def test_min_dr_infeasible():
    prof = make_profile([(4, 4, 8, 1.0, 1000, 1.0)], {"L1": {1: 0.5, 8: 0.73}})
    assert min_dr(prof, 1) is None


def test_min_dr_missing_table():
    prof = make_profile([(4, 4, 8, 1.0, 1000, 1.0)], {})
    with pytest.raises(MissingAccuracyTable):
        min_dr(prof, 1)


def test_cost_of_examples(profile, nets):
    rb1 = cost_of(profile, 1, 1, nets["4G"], LoadState())
    assert rb1.latency_total == pytest.approx(5.2, abs=0.05)
    rb8 = cost_of(profile, 8, 5, nets["3G"], LoadState())
    assert rb8.latency_total == pytest.approx(14.3, abs=0.15)


def test_cost_of_frozen_values(profile, nets):
    # 0.411 + 3152*8/5.85e3 + 0.4988 and 6.91 + 996*8/1.1e3 + 0.2806, in exact rationals.
    assert cost_of(profile, 1, 1, nets["4G"]).latency_total == pytest.approx(5.220227350427351, rel=1e-12)
    assert cost_of(profile, 8, 5, nets["3G"]).latency_total == pytest.approx(14.434236363636364, rel=1e-12)


def test_cloud_load_scales_only_tc(profile, nets):
    base = cost_of(profile, 5, 2, nets["4G"], LoadState(1.0, 1.5))
    doubled = cost_of(profile, 5, 2, nets["4G"], LoadState(1.0, 3.0))
    assert doubled.tc == 2 * base.tc
    assert (doubled.tm, doubled.tu, doubled.pm, doubled.pu) == (base.tm, base.tu, base.pm, base.pu)


def test_mobile_load_keeps_power(profile, nets):
    base = cost_of(profile, 5, 2, nets["4G"])
    loaded = cost_of(profile, 5, 2, nets["4G"], LoadState(2.0, 1.0))
    assert loaded.tm == 2 * base.tm
    assert loaded.pm == base.pm


def test_cost_of_range_errors(profile, nets):
    with pytest.raises(IndexError):
        cost_of(profile, 17, 1, nets["3G"])
    with pytest.raises(ValueError):
        cost_of(profile, 1, 300, nets["3G"])


def test_load_state_validation():
    with pytest.raises(ValueError):
        LoadState(0.5, 1.0)


@pytest.mark.parametrize("net,layer", [("3G", "RB8"), ("4G", "RB1"), ("WiFi", "RB1")])
@pytest.mark.parametrize("objective", ["latency", "energy"])
def test_select_bundled(profile, nets, net, layer, objective):
    plan = select(profile, nets[net], LoadState(), objective)
    assert plan.layer_name == layer
    assert plan.d_r == {"RB8": 5, "RB1": 1}[layer]
    assert plan.accuracy >= 0.74


def test_select_singleton(nets):
    prof = make_profile([(7, 7, 16, 3.0, 2000, 1.0)], {"L1": {4: 0.75}})
    for objective in ("latency", "energy"):
        plan = select(prof, nets["3G"], objective=objective)
        assert (plan.layer_index, plan.d_r) == (1, 4)


def test_select_no_feasible(nets):
    prof = make_profile([(7, 7, 16, 3.0, 2000, 1.0), (7, 7, 16, 4.0, 2000, 0.5)],
                        {"L1": {4: 0.70}, "L2": {16: 0.72}})
    with pytest.raises(NoFeasiblePartition):
        select(prof, nets["3G"])
    with pytest.raises(NoFeasiblePartition):
        select_bruteforce(prof, nets["3G"])


def test_select_ties_prefer_shallow(nets):
    # Identical layers tie on every objective (not a loadable profile, but
    # select itself does not care).
    prof = make_profile([(4, 4, 4, 1.0, 1000, 1.0)] * 2, {"L1": {1: 0.75}, "L2": {1: 0.75}})
    assert select(prof, nets["4G"]).layer_index == 1
    assert select_bruteforce(prof, nets["4G"]).layer_index == 1


def test_select_rejects_unknown_objective(profile, nets):
    with pytest.raises(ValueError):
        select(profile, nets["3G"], objective="throughput")


def test_argmin_against_every_candidate(profile, nets):
    for net in nets.values():
        for objective in ("latency", "energy"):
            best = select(profile, net, objective=objective)
            for plan in candidate_plans(profile, net, objective=objective):
                assert best.value <= plan.value


def test_cost_invariants_hold_exactly(profile, nets):
    for net in nets.values():
        for plan in candidate_plans(profile, net, LoadState(1.3, 2.7)):
            c = plan.cost
            assert c.latency_total == c.tm + c.tu + c.tc
            assert c.energy_total == c.tm * c.pm / 1000 + c.tu * c.pu / 1000


@pytest.mark.parametrize("net", ["3G", "4G", "WiFi"])
def test_cloud_load_moves_split_deeper(profile, nets, net):
    picks = [select(profile, nets[net], LoadState(1.0, k)).layer_index for k in (1, 2, 4, 8)]
    assert picks == sorted(picks)


def test_common_scaling_keeps_latency_argmin(profile, nets):
    # Scaling compute latencies and uplink time (rate / c) by c scales every total by c.
    from dataclasses import replace
    from splitplan.wireless import NetworkModel

    c = 3.5
    scaled = replace(profile, layers=tuple(
        replace(l, mobile_latency_base=l.mobile_latency_base * c,
                cloud_latency_base=l.cloud_latency_base * c) for l in profile.layers))
    for net in nets.values():
        slow = NetworkModel(net.name, net.uplink_mbps / c, net.alpha_u, net.beta)
        assert select(scaled, slow).layer_index == select(profile, net).layer_index


@given(st.integers(0, 100_000), st.integers(0, 100_000), st.sampled_from(["latency", "energy"]))
@settings(max_examples=60, deadline=None)
def test_select_matches_bruteforce(seed, net_seed, objective):
    prof = random_profile(seed)
    net = random_network(net_seed)
    try:
        plan = select(prof, net, objective=objective)
    except NoFeasiblePartition:
        with pytest.raises(NoFeasiblePartition):
            select_bruteforce(prof, net, objective=objective)
        return
    restricted = select_bruteforce(prof, net, objective=objective, min_dr_only=True)
    assert (restricted.layer_index, restricted.d_r) == (plan.layer_index, plan.d_r)
    assert restricted.value == pytest.approx(plan.value, rel=1e-12)
    # Cost grows with d_r at a fixed layer, so opening up every d_r cannot help.
    unrestricted = select_bruteforce(prof, net, objective=objective)
    assert unrestricted.value == pytest.approx(plan.value, rel=1e-12)
    assert unrestricted.layer_index == plan.layer_index


def test_larger_dr_never_beats_min_dr(nets):
    # A shallow layer with a tiny-but-infeasible D_r next to a feasible larger one:
    # the best the unrestricted search finds is still a per-layer minimum.
    prof = make_profile(
        [(28, 28, 64, 0.5, 3000, 2.0), (7, 7, 256, 9.0, 3000, 0.5)],
        {"L1": {1: 0.70, 3: 0.745, 40: 0.76}, "L2": {8: 0.75}},
    )
    for net in nets.values():
        for objective in ("latency", "energy"):
            brute = select_bruteforce(prof, net, objective=objective)
            assert brute.d_r == min_dr(prof, brute.layer_index)
            assert brute.value == pytest.approx(select(prof, net, objective=objective).value)
