"""
Tests for the instance generator, experiment runner and worked example
"""
import logging
from fractions import Fraction

import pytest

from experiments.demo import EXPECTED_PRICES, run_worked_example
from experiments.generator import derive_seed, generate_batch, generate_instance
from experiments.runner import (
    METRICS,
    TIME_METRIC,
    VARIANTS,
    InstanceResult,
    aggregate,
    batch_configs,
    evaluate_instance,
    report_to_frame,
    run_experiment,
    run_instances,
    sweep,
    write_report_csv,
)
from models.instance import direct_distance, round_trip_cost, validate_instance
from models.schemas import CostPolicy, GeneratorConfig
from phases.alternatives import assign_costs


# ==================== GENERATOR ====================

def test_same_seed_same_instance():
    config = GeneratorConfig(n=6, seed=42)
    assert generate_instance(config) == generate_instance(config)
    assert generate_instance(config) != generate_instance(config.copy(update={'seed': 43}))


def test_derived_seeds_are_stable_and_distinct():
    seeds = [derive_seed(9, k) for k in range(50)]
    assert seeds == [derive_seed(9, k) for k in range(50)]
    assert len(set(seeds)) == 50
    assert all(0 <= s < 2 ** 64 for s in seeds)


def test_generated_instances_are_well_formed():
    for inst in generate_batch(GeneratorConfig(n=5, seed=1), 5):
        assert validate_instance(inst) == []
        assert inst.geometry is not None


def test_zero_sigma_bids_sit_on_the_floor():
    inst = generate_instance(GeneratorConfig(n=5, seed=3, sigma=0))
    for i in range(1, 6):
        assert inst.passenger(i).bid == round_trip_cost(inst, i)
    direct = generate_instance(GeneratorConfig(n=5, seed=3, sigma=0, bid_floor=CostPolicy.DIRECT))
    for i in range(1, 6):
        assert direct.passenger(i).bid == direct_distance(direct, i)


@pytest.mark.parametrize("seed", range(3))
def test_bids_cover_every_cost_policy(seed):
    inst = generate_instance(GeneratorConfig(n=10, seed=seed))
    bids = inst.bids()
    for policy in CostPolicy:
        costs = assign_costs(inst, policy)
        assert all(bids[i] >= costs[i] for i in range(1, 11))


def test_time_windows_follow_config():
    config = GeneratorConfig(n=3, seed=11, pickup_window_min=10, travel_factor=3, depart_time=100)
    inst = generate_instance(config)
    dest = inst.destination
    assert inst.max_arrival == 100 + 2 * (inst.travel_time[0][dest] + 1800)
    for i in range(1, 4):
        p = inst.passenger(i)
        assert p.max_pickup_time == 100 + 600
        assert p.max_travel_time == 3 * inst.travel_time[i][i + 3]


def test_generate_batch_uses_derived_seeds():
    batch = generate_batch(GeneratorConfig(n=3, seed=5), 3)
    assert batch[1] == generate_instance(GeneratorConfig(n=3, seed=derive_seed(5, 1)))


# ==================== RUNNER ====================

@pytest.fixture(scope="module")
def small_report():
    return run_experiment(batch_configs(GeneratorConfig(n=4, seed=3), 4))


def test_report_has_every_variant_and_metric(small_report):
    assert small_report.failures == ()
    assert small_report.instance_count + small_report.excluded_zero_welfare == 4
    assert len(small_report.rows) == len(VARIANTS) * (len(METRICS) + 1)
    assert small_report.row("WMS-UB", TIME_METRIC) is not None


def test_vcg_normalizes_to_one(small_report):
    if small_report.instance_count:
        assert small_report.row("VCG", "welfare").mean == 1
        assert small_report.row("VCG", "welfare").variance == 0


def test_normalized_welfare_never_exceeds_vcg(small_report):
    for name in VARIANTS:
        row = small_report.row(name, "welfare")
        assert row is None or row.mean <= 1


def test_single_instance_has_zero_spread():
    report = run_experiment(batch_configs(GeneratorConfig(n=4, seed=8), 1), ["WMS-Direct"])
    for row in report.rows:
        if row.metric != TIME_METRIC:
            assert row.variance == 0
            assert row.std_text == "0"


def test_empty_variant_list_gives_empty_report():
    report = run_experiment(batch_configs(GeneratorConfig(n=3, seed=0), 2), [])
    assert report.rows == ()
    assert report_to_frame(report).empty


def test_unknown_variant_is_rejected():
    with pytest.raises(ValueError, match="unknown variants"):
        run_experiment([GeneratorConfig(n=3)], ["WMS-Everything"])


def test_aggregate_separates_failures_and_zero_welfare():
    results = [
        InstanceResult(0, 1, error="RuntimeError: boom"),
        InstanceResult(1, 2, normalizer=Fraction(0)),
    ]
    report = aggregate(results, ["WMS-UB"])
    assert report.rows == ()
    assert report.excluded_zero_welfare == 1
    assert report.failures == ("instance 0: RuntimeError: boom",)


def test_csv_is_independent_of_worker_count(tmp_path):
    configs = batch_configs(GeneratorConfig(n=4, seed=21), 4)
    one = write_report_csv(report_to_frame(run_experiment(configs, workers=1)), tmp_path / "one.csv")
    two = write_report_csv(report_to_frame(run_experiment(configs, workers=2)), tmp_path / "two.csv")
    assert one.read_bytes() == two.read_bytes()
    assert one.read_text(encoding='utf-8').splitlines()[0] == "variant,metric,mean,std,count"


def test_timings_only_on_request(small_report):
    assert TIME_METRIC not in set(report_to_frame(small_report)['metric'])
    assert TIME_METRIC in set(report_to_frame(small_report, include_timings=True)['metric'])


def test_run_instances_matches_run_experiment():
    configs = batch_configs(GeneratorConfig(n=4, seed=13), 2)
    from_configs = run_experiment(configs, ["WMS-UB", "VCG"])
    from_instances = run_instances([generate_instance(c) for c in configs], ["WMS-UB", "VCG"])
    assert report_to_frame(from_configs).equals(report_to_frame(from_instances))


def test_sweep_stacks_grid():
    frame = sweep([3, 4], [0.0, 3.0], count=2, seed=1, variants=["WMS-UB"])
    assert list(frame.columns) == ['n', 'sigma', 'variant', 'metric', 'mean', 'std', 'count']
    assert set(frame['n']) == {3, 4}
    assert set(frame['sigma']) == {0.0, 3.0}


def test_empty_sweep():
    assert sweep([], [3.0], count=1).empty


# ==================== WORKED EXAMPLE ====================

def test_demo_transcript():
    lines = []
    transcript, outcomes = run_worked_example(echo=lines.append)
    assert lines == transcript
    assert "WMS winner: R [1, 2]" in transcript
    assert "  p_1 = 20/3 (6.666666666667)" in transcript
    assert "  p_2 = 10" in transcript
    assert "UMS winner: B [1]" in transcript
    assert "VCGS winner: G [1, 3, 4]" in transcript
    assert {i: outcomes["wms"].prices[i] for i in (1, 2)} == EXPECTED_PRICES


# ==================== BID FLOOR ====================

def test_zero_sigma_bids_all_sit_on_upper_bound():
    inst = generate_instance(GeneratorConfig(n=5, seed=3, sigma=0))
    result = evaluate_instance(inst, ["WMS-UB"])
    assert result.floor_bids == 5
    assert result.bid_count == 5


def test_floor_share_counts_usable_instances_only():
    results = [
        InstanceResult(0, 1, normalizer=Fraction(1), floor_bids=1, bid_count=4),
        InstanceResult(1, 2, normalizer=Fraction(3), floor_bids=3, bid_count=4),
        InstanceResult(2, 3, normalizer=Fraction(0), floor_bids=4, bid_count=4),
    ]
    report = aggregate(results, [])
    assert report.floor_bid_share == Fraction(1, 2)
    assert aggregate([], []).floor_bid_share is None


def test_sweep_logs_floor_share_and_trend(caplog):
    with caplog.at_level(logging.INFO, logger="experiments.runner"):
        sweep([4], [0.0], count=2, seed=1, variants=["WMS-UB", "VCGs-UB"])
    assert "zero upper-bound surplus" in caplog.text
