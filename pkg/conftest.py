"""
Shared fixtures for the RideForge test suite
"""
from typing import Dict, List, Optional, Sequence

import pytest

from experiments.demo import example_family
from experiments.generator import generate_instance
from models.schemas import CostMode, GeneratorConfig, Instance, PassengerRequest


def build_matrix_instance(
    cost: Sequence[Sequence[int]],
    time: Optional[Sequence[Sequence[int]]] = None,
    bids: Optional[Dict[int, int]] = None,
    max_pickup: int = 1000,
    max_ride: int = 1000,
    max_arrival: int = 1000,
    capacity: int = 3,
    cost_mode: CostMode = CostMode.RIDESHARING_DETOUR,
) -> Instance:
    """Instance over explicit matrices; times default to the costs"""
    size = len(cost)
    n = (size - 2) // 2
    time = time if time is not None else cost
    bids = bids or {}
    passengers: List[PassengerRequest] = [
        PassengerRequest(id=i, bid=bids.get(i, 100), max_pickup_time=max_pickup, max_travel_time=max_ride)
        for i in range(1, n + 1)
    ]
    return Instance(
        n=n,
        passengers=passengers,
        travel_time=[list(r) for r in time],
        travel_cost=[list(r) for r in cost],
        depart_time=0,
        max_arrival=max_arrival,
        capacity=capacity,
        cost_mode=cost_mode,
    )


def line_matrix(positions: Sequence[int]) -> List[List[int]]:
    """|x_a - x_b| for points on a line; metric by construction"""
    return [[abs(a - b) for b in positions] for a in positions]


@pytest.fixture
def matrix_instance():
    return build_matrix_instance


@pytest.fixture
def worked_example():
    return example_family()


@pytest.fixture
def two_passenger_line():
    # origin 0, pickups at 1 and 2, dropoffs at 3 and 4, destination at 5
    return build_matrix_instance(line_matrix([0, 1, 2, 3, 4, 5]))


@pytest.fixture
def small_euclidean():
    return generate_instance(GeneratorConfig(n=4, seed=7))
