"""
Synthetic instances: uniform points in a rectangle, Euclidean times and
costs, half-gaussian bids above the direct cost.
"""
import logging
from typing import List

import numpy as np

from models.instance import expand_euclidean
from models.schemas import EuclideanGeometry, GeneratorConfig, Instance, PassengerRequest
from phases.alternatives import assign_costs

logger = logging.getLogger(__name__)

# micro-units per money unit
MICRO = 1_000_000


def derive_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for the index-th instance of a batch"""
    state = np.random.SeedSequence([seed, index]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 32) | int(state[1])


def generate_instance(config: GeneratorConfig) -> Instance:
    """
    Draws, in order: 2n+2 points (origin, pickups, dropoffs, destination),
    then n normal deviates for the bids. The seed fixes everything.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n
    xs = rng.integers(0, config.rect_width + 1, size=2 * n + 2)
    ys = rng.integers(0, config.rect_height + 1, size=2 * n + 2)
    # sigma is in money units, one unit being the cost of 1 km
    unit = 1000 * config.cost_per_m
    noise = rng.normal(0.0, config.sigma * unit, size=n) if config.sigma > 0 else np.zeros(n)

    geometry = EuclideanGeometry(
        speed_m_per_s=config.speed_m_per_s,
        cost_per_m=config.cost_per_m,
        points=[(int(x), int(y)) for x, y in zip(xs, ys)],
    )
    travel_time, travel_cost = expand_euclidean(geometry)
    dest = 2 * n + 1
    t0 = config.depart_time

    passengers: List[PassengerRequest] = [
        PassengerRequest(
            id=i,
            bid=0,
            max_pickup_time=t0 + 60 * config.pickup_window_min,
            max_travel_time=config.travel_factor * travel_time[i][i + n],
        )
        for i in range(1, n + 1)
    ]
    inst = Instance(
        n=n,
        passengers=passengers,
        travel_time=travel_time,
        travel_cost=travel_cost,
        depart_time=t0,
        max_arrival=t0 + config.arrival_factor * (travel_time[0][dest] + config.arrival_slack_s),
        capacity=config.capacity,
        cost_mode=config.cost_mode,
        geometry=geometry,
    )

    floor = assign_costs(inst, config.bid_floor)
    bids = {
        i: max(floor[i], travel_cost[i][i + n] + int(round(abs(float(noise[i - 1])))))
        for i in range(1, n + 1)
    }
    logger.debug(f"Generated n={n} seed={config.seed}")
    return inst.with_bids(bids)


def generate_batch(config: GeneratorConfig, count: int) -> List[Instance]:
    """count instances whose seeds are derived from config.seed and their index"""
    return [
        generate_instance(config.copy(update={'seed': derive_seed(config.seed, k)}))
        for k in range(count)
    ]
