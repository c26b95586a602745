"""
Exact minimum-cost routing of a passenger subset

Enumerates every pickup/dropoff order that respects precedence, with tight
arrival times (no waiting), and keeps the cheapest feasible one. Ties are
broken by the lexicographically smallest node sequence, which the
depth-first search in ascending node order yields for free.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from models.errors import CapacityExceededError, PassengerIndexError
from models.schemas import CostMode, Instance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Route:
    node_sequence: Tuple[int, ...]
    arrival_times: Tuple[int, ...]
    onboard_counts: Tuple[int, ...]
    total_cost: int
    detour_cost: int


def trip_cost(route: Route, mode: CostMode) -> int:
    """cost(A) of a route under the instance cost mode"""
    if CostMode(mode) == CostMode.RIDESHARING_DETOUR:
        return route.detour_cost
    return route.total_cost


def _direct_route(inst: Instance) -> Optional[Route]:
    dest = inst.destination
    arrival = inst.depart_time + inst.travel_time[0][dest]
    if arrival > inst.max_arrival:
        return None
    total = inst.travel_cost[0][dest]
    return Route((0, dest), (inst.depart_time, arrival), (0, 0), total, 0)


def best_route(inst: Instance, subset: Iterable[int]) -> Optional[Route]:
    """
    Cheapest feasible route serving exactly the given passengers.

    Returns None when no order satisfies the pickup deadlines, ride-time
    limits, capacity and the arrival horizon. Matrices must pass
    validate_instance; the search prunes on non-negative costs.
    """
    members = sorted(set(subset))
    if len(members) > inst.capacity:
        raise CapacityExceededError(len(members), inst.capacity)
    for i in members:
        if not 1 <= i <= inst.n:
            raise PassengerIndexError(i, inst.n)
    if not members:
        return _direct_route(inst)

    n = inst.n
    dest = inst.destination
    tt = inst.travel_time
    tc = inst.travel_cost
    horizon = inst.max_arrival
    capacity = inst.capacity
    deadline = {i: inst.passenger(i).max_pickup_time for i in members}
    ride_limit = {i: inst.passenger(i).max_travel_time for i in members}
    event_count = 2 * len(members)

    best_cost: Optional[int] = None
    best_path: List[Tuple[int, ...]] = []
    path = [0]
    times = [inst.depart_time]
    loads = [0]
    picked_at = {}
    waiting = list(members)

    def extend(cost: int) -> None:
        nonlocal best_cost
        last = path[-1]
        now = times[-1]
        # All stops placed: close the route at the destination
        if len(path) - 1 == event_count:
            arrival = now + tt[last][dest]
            total = cost + tc[last][dest]
            if arrival <= horizon and (best_cost is None or total < best_cost):
                best_cost = total
                best_path[:] = [tuple(path) + (dest,), tuple(times) + (arrival,), tuple(loads) + (0,)]
            return

        # Pickups only with a free seat, dropoffs for anyone on board
        candidates = []
        if loads[-1] < capacity:
            candidates.extend(waiting)
        candidates.extend(i + n for i in picked_at)
        for node in sorted(candidates):
            step_cost = cost + tc[last][node]
            # costs are non-negative, so an equal prefix can only tie later
            if best_cost is not None and step_cost >= best_cost:
                continue
            arrival = now + tt[last][node]
            if arrival > horizon:
                continue
            # Check pickup deadline or ride-time limit
            if node <= n:
                if arrival > deadline[node]:
                    continue
                waiting.remove(node)
                picked_at[node] = arrival
                load = loads[-1] + 1
            else:
                passenger = node - n
                boarded = picked_at[passenger]
                if arrival - boarded > ride_limit[passenger]:
                    continue
                del picked_at[passenger]
                load = loads[-1] - 1
            path.append(node)
            times.append(arrival)
            loads.append(load)
            extend(step_cost)

            # Undo the step
            path.pop()
            times.pop()
            loads.pop()
            if node <= n:
                del picked_at[node]
                waiting.append(node)
                waiting.sort()
            else:
                picked_at[passenger] = boarded

    extend(0)
    if best_cost is None:
        return None
    sequence, arrivals, onboard = best_path
    return Route(sequence, arrivals, onboard, best_cost, best_cost - tc[0][dest])


def replay_route(inst: Instance, route: Route) -> List[str]:
    """
    Re-check a route from scratch: endpoints, precedence, arrival times,
    deadlines, ride times, capacity and the recorded costs.
    """
    problems: List[str] = []
    seq = route.node_sequence
    n = inst.n
    dest = inst.destination
    if not seq or seq[0] != 0 or seq[-1] != dest:
        problems.append("route must start at origin and end at destination")
        return problems
    if len(route.arrival_times) != len(seq) or len(route.onboard_counts) != len(seq):
        problems.append("arrival_times/onboard_counts length mismatch")
        return problems

    now = inst.depart_time
    load = 0
    total = 0
    boarded = {}
    dropped = set()
    if route.arrival_times[0] != now:
        problems.append(f"departure recorded at {route.arrival_times[0]}, expected {now}")
    for pos in range(1, len(seq)):
        prev, node = seq[pos - 1], seq[pos]
        now += inst.travel_time[prev][node]
        total += inst.travel_cost[prev][node]
        if route.arrival_times[pos] != now:
            problems.append(f"arrival at node {node} is {route.arrival_times[pos]}, expected {now}")
        if 1 <= node <= n:
            if node in boarded or node in dropped:
                problems.append(f"passenger {node} picked up twice")
            boarded[node] = now
            load += 1
            if now > inst.passenger(node).max_pickup_time:
                problems.append(f"passenger {node} picked up at {now} after deadline")
        elif n < node <= 2 * n:
            passenger = node - n
            if passenger not in boarded:
                problems.append(f"passenger {passenger} dropped before pickup")
            else:
                ride = now - boarded.pop(passenger)
                if ride > inst.passenger(passenger).max_travel_time:
                    problems.append(f"passenger {passenger} rides {ride}s over limit")
                dropped.add(passenger)
            load -= 1
        elif node != dest or pos != len(seq) - 1:
            problems.append(f"unexpected node {node} at position {pos}")
        if load > inst.capacity:
            problems.append(f"load {load} exceeds capacity at node {node}")
        if route.onboard_counts[pos] != load:
            problems.append(f"onboard count at node {node} is {route.onboard_counts[pos]}, expected {load}")
    if boarded:
        problems.append(f"passengers never dropped: {sorted(boarded)}")
    if now > inst.max_arrival:
        problems.append(f"arrives at {now} after horizon {inst.max_arrival}")
    if total != route.total_cost:
        problems.append(f"total_cost {route.total_cost}, expected {total}")
    if route.detour_cost != total - inst.travel_cost[0][dest]:
        problems.append("detour_cost does not match total_cost minus direct cost")
    return problems
