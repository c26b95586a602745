"""
Tests for exact subset routing
"""
from itertools import combinations, permutations

import numpy as np
import pytest

from conftest import build_matrix_instance, line_matrix
from experiments.generator import generate_instance
from models.errors import CapacityExceededError
from models.schemas import CostMode, GeneratorConfig
from phases.routing import Route, best_route, replay_route, trip_cost


def brute_force_route(inst, subset):
    """(total_cost, node sequence) of the cheapest feasible order, by plain enumeration"""
    n = inst.n
    dest = inst.destination
    events = [i for i in subset] + [i + n for i in subset]
    best = None
    for order in permutations(events):
        if any(order.index(i) > order.index(i + n) for i in subset):
            continue
        now, load, cost, ok = inst.depart_time, 0, 0, True
        boarded = {}
        seq = (0,) + order + (dest,)
        for prev, node in zip(seq, seq[1:]):
            now += inst.travel_time[prev][node]
            cost += inst.travel_cost[prev][node]
            if 1 <= node <= n:
                load += 1
                boarded[node] = now
                ok &= now <= inst.passenger(node).max_pickup_time and load <= inst.capacity
            elif node != dest:
                load -= 1
                ok &= now - boarded[node - n] <= inst.passenger(node - n).max_travel_time
        ok &= now <= inst.max_arrival
        if ok and (best is None or (cost, seq) < best):
            best = (cost, seq)
    return best


def random_line_instance(rng):
    n = 3
    positions = [int(x) for x in rng.integers(0, 21, size=2 * n + 2)]
    inst = build_matrix_instance(
        line_matrix(positions),
        max_pickup=int(rng.integers(0, 31)),
        max_arrival=int(rng.integers(10, 61)),
        capacity=int(rng.integers(1, 4)),
    )
    limits = {
        i: inst.passenger(i).copy(update={'max_travel_time': inst.travel_time[i][i + n] + int(rng.integers(0, 11))})
        for i in range(1, n + 1)
    }
    return inst.copy(update={'passengers': [limits[i] for i in range(1, n + 1)]})


# ==================== EXAMPLES ====================

def test_empty_subset_is_direct_drive(two_passenger_line):
    route = best_route(two_passenger_line, [])
    assert route.node_sequence == (0, 5)
    assert route.detour_cost == 0
    assert route.total_cost == 5


def test_single_passenger_unit_edges():
    unit = [[0 if a == b else 1 for b in range(4)] for a in range(4)]
    inst = build_matrix_instance(unit)
    route = best_route(inst, {1})
    assert route.node_sequence == (0, 1, 2, 3)
    assert route.total_cost == 3
    assert trip_cost(route, CostMode.RIDESOURCING_TOTAL) == 3
    assert trip_cost(route, CostMode.RIDESHARING_DETOUR) == 2


def test_interleaved_order_beats_nested(two_passenger_line):
    route = best_route(two_passenger_line, {1, 2})
    assert route.node_sequence == (0, 1, 2, 3, 4, 5)
    assert route.total_cost == 5
    assert route.onboard_counts == (0, 1, 2, 1, 0, 0)
    assert brute_force_route(two_passenger_line, (1, 2)) == (5, route.node_sequence)


def test_ride_limit_changes_order():
    # p1 at 1, p2 at 3, d1 at 4, d2 at 2 on a line
    inst = build_matrix_instance(line_matrix([0, 1, 3, 4, 2, 5]))
    free = best_route(inst, {1, 2})
    assert (free.node_sequence, free.total_cost) == ((0, 1, 2, 4, 3, 5), 7)

    limited = inst.passenger(1).copy(update={'max_travel_time': 3})
    inst = inst.copy(update={'passengers': [limited, inst.passenger(2)]})
    route = best_route(inst, {1, 2})
    # four orders tie at 9; the lexicographically first wins
    assert (route.node_sequence, route.total_cost) == ((0, 1, 2, 3, 4, 5), 9)
    assert brute_force_route(inst, (1, 2)) == (9, route.node_sequence)


def test_horizon_makes_subset_infeasible(two_passenger_line):
    tight = two_passenger_line.copy(update={'max_arrival': 4})
    assert best_route(tight, {1}) is None
    assert best_route(tight, []) is None


def test_subset_above_capacity_is_rejected(two_passenger_line):
    single_seat = two_passenger_line.copy(update={'capacity': 1})
    with pytest.raises(CapacityExceededError):
        best_route(single_seat, {1, 2})


def test_capacity_one_serves_sequentially(two_passenger_line):
    inst = two_passenger_line.copy(update={'capacity': 1})
    assert best_route(inst, {1}).onboard_counts == (0, 1, 0, 0)


def test_trip_cost_modes():
    route = Route((0, 1, 2, 3), (0, 1, 2, 3), (0, 1, 0, 0), total_cost=10, detour_cost=6)
    assert trip_cost(route, CostMode.RIDESHARING_DETOUR) == 6
    assert trip_cost(route, CostMode.RIDESOURCING_TOTAL) == 10
    direct = Route((0, 3), (0, 4), (0, 0), total_cost=4, detour_cost=0)
    assert trip_cost(direct, CostMode.RIDESHARING_DETOUR) == 0


# ==================== PROPERTIES ====================

@pytest.mark.parametrize("seed", range(25))
def test_matches_brute_force_on_random_line_instances(seed):
    rng = np.random.default_rng(seed)
    inst = random_line_instance(rng)
    for size in range(1, inst.capacity + 1):
        for subset in combinations(range(1, inst.n + 1), size):
            route = best_route(inst, subset)
            expected = brute_force_route(inst, subset)
            if expected is None:
                assert route is None, f"seed={seed} subset={subset}"
            else:
                assert (route.total_cost, route.node_sequence) == expected, f"seed={seed} subset={subset}"
                assert replay_route(inst, route) == [], f"seed={seed} subset={subset}"


@pytest.mark.parametrize("seed", range(5))
def test_matches_brute_force_on_euclidean_instances(seed):
    inst = generate_instance(GeneratorConfig(n=4, seed=seed))
    for size in range(1, 4):
        for subset in combinations(range(1, 5), size):
            route = best_route(inst, subset)
            expected = brute_force_route(inst, subset)
            got = None if route is None else (route.total_cost, route.node_sequence)
            assert got == expected, f"seed={seed} subset={subset}"


@pytest.mark.parametrize("seed", range(5))
def test_dropping_a_passenger_never_costs_more(seed):
    inst = generate_instance(GeneratorConfig(n=5, seed=100 + seed, pickup_window_min=60, arrival_slack_s=7200))
    for subset in combinations(range(1, 6), 3):
        route = best_route(inst, subset)
        if route is None:
            continue
        for i in subset:
            smaller = best_route(inst, [j for j in subset if j != i])
            assert smaller is not None, f"seed={seed} subset={subset} without {i}"
            assert smaller.total_cost <= route.total_cost


def test_replay_flags_tampered_route(two_passenger_line):
    route = best_route(two_passenger_line, {1, 2})
    tampered = Route(route.node_sequence, route.arrival_times, route.onboard_counts,
                     route.total_cost + 1, route.detour_cost + 1)
    assert replay_route(two_passenger_line, tampered)
    swapped = Route((0, 3, 1, 2, 4, 5), route.arrival_times, route.onboard_counts,
                    route.total_cost, route.detour_cost)
    assert any("dropped before pickup" in p for p in replay_route(two_passenger_line, swapped))
