"""
Tests for passenger costs, trip enumeration and family structure
"""
import json
from itertools import combinations

import numpy as np
import pytest

from conftest import build_matrix_instance, line_matrix
from experiments.generator import generate_instance
from models.errors import DuplicateAlternativeError, MechanismError
from models.schemas import CostPolicy, GeneratorConfig
from oracle.bounds import budget_counterexample_family, budget_counterexample_instance, tightness_family
from phases.alternatives import (
    EMPTY,
    Alternative,
    assign_costs,
    build_family,
    is_downward_closed,
    load_abstract_family,
    make_abstract_family,
    tie_break_cmp,
    tie_break_key,
)
from phases.routing import best_route, trip_cost


# ==================== COSTS ====================

@pytest.mark.parametrize("policy, expected", [
    (CostPolicy.ZERO, {1: 0, 2: 0}),
    (CostPolicy.DIRECT, {1: 2, 2: 2}),
    (CostPolicy.UPPER_BOUND, {1: 6, 2: 6}),
])
def test_assign_costs_per_policy(two_passenger_line, policy, expected):
    costs = assign_costs(two_passenger_line, policy)
    assert dict(costs.costs) == expected
    assert costs.total([1, 2]) == sum(expected.values())


def test_costs_ignore_bids(two_passenger_line):
    rebid = two_passenger_line.with_bids({1: 0, 2: 7})
    for policy in CostPolicy:
        assert assign_costs(rebid, policy) == assign_costs(two_passenger_line, policy)


def test_policy_accepts_string_value(two_passenger_line):
    assert assign_costs(two_passenger_line, "direct").policy == CostPolicy.DIRECT


# ==================== ENUMERATION ====================

def test_line_family_holds_every_subset(two_passenger_line):
    family = build_family(two_passenger_line, CostPolicy.DIRECT)
    assert [a.members for a in family.alternatives] == [(1,), (2,), (1, 2), ()]
    assert family.find((2, 1)).surpluses == (98, 98)
    assert family.find(()) is EMPTY
    assert family.max_size == 2


def test_no_affordable_passenger_leaves_only_empty_trip():
    inst = build_matrix_instance(line_matrix([0, 1, 2, 3, 4, 5]), bids={1: 0, 2: 0})
    family = build_family(inst, CostPolicy.UPPER_BOUND)
    assert family.alternatives == (EMPTY,)
    assert family.pruned == frozenset({1, 2})

    kept = build_family(inst, CostPolicy.UPPER_BOUND, prune_unaffordable=False)
    assert kept.alternatives == (EMPTY,)
    assert len(kept.pool) == 3
    assert not any(a.is_active for a in kept.pool)


def test_budget_filter_breaks_downward_closure():
    family = budget_counterexample_family()
    assert [a.members for a in family.alternatives] == [(1, 2), ()]
    closure = is_downward_closed(family)
    assert not closure.closed
    assert closure.witness == ((1, 2), (1,))


def test_zero_policy_skips_budget_filter():
    family = build_family(budget_counterexample_instance(), CostPolicy.ZERO)
    assert {a.members for a in family.alternatives} >= {(1,), (1, 2)}


@pytest.mark.parametrize("seed", range(4))
def test_upper_bound_never_rejects_routable_trips(seed):
    rng = np.random.default_rng(seed)
    positions = [int(x) for x in rng.integers(0, 21, size=10)]
    inst = build_matrix_instance(line_matrix(positions))
    family = build_family(inst, CostPolicy.UPPER_BOUND)
    expected = {c for size in (1, 2, 3) for c in combinations(range(1, 5), size)}
    assert {a.members for a in family.pool} == expected
    for a in family.pool:
        assert family.costs.total(a.members) >= a.cost


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("policy", [CostPolicy.DIRECT, CostPolicy.UPPER_BOUND, CostPolicy.ZERO])
def test_enumeration_matches_exhaustive_routing(seed, policy):
    inst = generate_instance(GeneratorConfig(n=5, seed=seed, pickup_window_min=30))
    family = build_family(inst, policy, prune_unaffordable=False)
    costs = assign_costs(inst, policy)
    expected = set()
    for size in range(1, inst.capacity + 1):
        for combo in combinations(range(1, inst.n + 1), size):
            route = best_route(inst, combo)
            if route is None:
                continue
            if policy == CostPolicy.ZERO or costs.total(combo) >= trip_cost(route, inst.cost_mode):
                expected.add(combo)
    assert {a.members for a in family.pool} == expected


def test_shared_route_cache_gives_same_families(small_euclidean):
    cache = {}
    for policy in CostPolicy:
        shared = build_family(small_euclidean, policy, route_cache=cache)
        fresh = build_family(small_euclidean, policy)
        assert shared.pool == fresh.pool
    assert cache


def test_pool_order_is_size_then_ids(small_euclidean):
    family = build_family(small_euclidean, CostPolicy.ZERO)
    keys = [(a.size, a.members) for a in family.pool]
    assert keys == sorted(keys)


# ==================== BID CHANGES ====================

def test_with_bid_shifts_only_own_trips(worked_example):
    raised = worked_example.with_bid(3, 20)
    assert raised.find((1, 3, 4)).surpluses == (10, 16, 4)
    assert raised.find((1, 2)).surpluses == (10, 8)
    assert raised.bids[3] == 20
    assert worked_example.find((1, 3, 4)).surpluses == (10, 4, 4)


def test_with_bid_below_cost_deactivates_trips(worked_example):
    lowered = worked_example.with_bid(2, 3)
    assert lowered.find((1, 2)) is None
    assert lowered.find((2,)) is None
    assert any(a.members == (1, 2) for a in lowered.pool)
    assert lowered.with_bid(2, 12).alternatives == worked_example.alternatives


def test_with_bid_refuses_pruned_passenger():
    inst = build_matrix_instance(line_matrix([0, 1, 2, 3, 4, 5]), bids={1: 0, 2: 100})
    family = build_family(inst, CostPolicy.DIRECT)
    with pytest.raises(MechanismError, match="pruned"):
        family.with_bid(1, 50)
    with pytest.raises(MechanismError):
        family.with_bid(9, 50)


# ==================== ABSTRACT FAMILIES ====================

def test_abstract_family_recovers_bids():
    family = make_abstract_family([((2, 1), {1: 3, 2: 5}, 4), ((3,), {3: 1})], {1: 2, 2: 2, 3: 1})
    assert family.bids == {1: 5, 2: 7, 3: 2}
    assert family.find((1, 2)).cost == 4
    assert family.provenance == "abstract"


def test_abstract_family_rejects_duplicates():
    with pytest.raises(DuplicateAlternativeError):
        make_abstract_family([((1, 2), {1: 1, 2: 1}), ((2, 1), {1: 2, 2: 2})])


def test_abstract_family_skips_empty_entries():
    family = make_abstract_family([((), {}), ((1,), {1: 4})])
    assert [a.members for a in family.alternatives] == [(1,), ()]


def test_empty_spec_is_the_empty_trip():
    family = make_abstract_family([])
    assert family.alternatives == (EMPTY,)
    assert family.passengers == ()
    assert family.max_size == 0


def test_load_abstract_family(tmp_path):
    path = tmp_path / "family.json"
    path.write_text(json.dumps({
        "alternatives": [
            {"members": [1, 2], "surpluses": {"1": 3, "2": 4}, "cost": 5},
            {"members": [2], "surpluses": {"2": 4}},
        ],
        "costs": {"1": 1, "2": 2},
    }), encoding='utf-8')
    family = load_abstract_family(path)
    assert family.bids == {1: 4, 2: 6}
    assert family.find((1, 2)).cost == 5


def test_abstract_file_surpluses_must_match_members(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "alternatives": [{"members": [1, 2], "surpluses": {"1": 3}}],
    }), encoding='utf-8')
    with pytest.raises(ValueError, match="surpluses"):
        load_abstract_family(path)


# ==================== STRUCTURE ====================

@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_tightness_families_are_downward_closed(k):
    assert is_downward_closed(tightness_family(k, 12)).closed


def test_missing_singleton_is_witnessed():
    family = make_abstract_family([((1, 2), {1: 1, 2: 1}), ((1,), {1: 1})])
    assert is_downward_closed(family) == (False, ((1, 2), (2,)))


def test_tie_break_prefers_objective_then_size_then_ids():
    a = Alternative((1, 2), 0, (1, 1))
    b = Alternative((3, 4), 0, (1, 1))
    c = Alternative((5,), 0, (2,))
    assert tie_break_cmp(a, b, 5, 5) == -1
    assert tie_break_cmp(c, a, 5, 5) == 1
    assert tie_break_cmp(c, a, 6, 5) == -1
    assert tie_break_cmp(a, a, 5, 5) == 0
    assert tie_break_cmp(EMPTY, c, 0, 0) == 1


def test_tie_break_is_a_strict_total_order(worked_example):
    alternatives = worked_example.alternatives
    for x, y in combinations(alternatives, 2):
        assert tie_break_cmp(x, y, 0, 0) == -tie_break_cmp(y, x, 0, 0) != 0
    ranked = sorted(alternatives, key=lambda a: tie_break_key(a, 0))
    for x, y, z in combinations(ranked, 3):
        assert tie_break_cmp(x, y, 0, 0) == tie_break_cmp(y, z, 0, 0) == tie_break_cmp(x, z, 0, 0) == -1


def test_tie_break_lexicographic_within_size():
    a = Alternative((1, 3), 0, (2, 2))
    b = Alternative((1, 4), 0, (2, 2))
    assert tie_break_cmp(a, b, a.wm, b.wm) == -1
