"""
Instance operations: invariant checks, passenger distances, Euclidean
expansion and instance file I/O.
"""
import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from utils.validators import validate_json_schema

from .errors import PassengerIndexError
from .schemas import (
    MATRIX_ENTRY_BOUND,
    EuclideanGeometry,
    Instance,
    InstanceFile,
    MatrixGeometry,
    PassengerRequest,
)

logger = logging.getLogger(__name__)

# Largest time value the arithmetic is validated for
TIME_BOUND = 2 ** 40


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.rule} at {self.field}"
        return f"{text} ({self.detail})" if self.detail else text


# ==================== VALIDATION ====================

def _check_matrix(name: str, matrix: Sequence[Sequence[int]], size: int) -> List[Violation]:
    if len(matrix) != size or any(len(row) != size for row in matrix):
        return [Violation(name, "matrix-shape", f"expected {size}x{size}")]
    found = []
    for i in range(size):
        if matrix[i][i] != 0:
            found.append(Violation(f"{name}[{i}][{i}]", "diagonal-nonzero", str(i)))
    for i in range(size):
        for j in range(size):
            if matrix[i][j] < 0:
                found.append(Violation(f"{name}[{i}][{j}]", "negative-entry"))
            elif matrix[i][j] > MATRIX_ENTRY_BOUND:
                found.append(Violation(f"{name}[{i}][{j}]", "entry-bound", "> 2**60"))
    return found


def validate_instance(inst: Instance) -> List[Violation]:
    """
    Check every structural rule of an instance.

    Returns an empty list when the instance is well formed. Never raises;
    the same instance always yields the same list.
    """
    violations: List[Violation] = []
    size = 2 * inst.n + 2

    if inst.n < 0 or len(inst.passengers) != inst.n:
        violations.append(Violation("passengers", "passenger-count",
                                    f"n={inst.n}, got {len(inst.passengers)}"))
    if inst.capacity < 1:
        violations.append(Violation("capacity", "capacity-nonpositive"))
    if inst.depart_time < 0:
        violations.append(Violation("depart_time", "negative-time"))
    if inst.max_arrival > TIME_BOUND:
        violations.append(Violation("max_arrival", "time-bound", f"> {TIME_BOUND}"))
    if inst.max_arrival < inst.depart_time:
        violations.append(Violation("max_arrival", "horizon-before-departure"))

    time_problems = _check_matrix("travel_time", inst.travel_time, size)
    cost_problems = _check_matrix("travel_cost", inst.travel_cost, size)
    violations.extend(time_problems)
    violations.extend(cost_problems)
    time_shape_ok = not any(v.rule == "matrix-shape" for v in time_problems)

    for index, p in enumerate(inst.passengers, start=1):
        where = f"passengers[{index}]"
        if p.id != index:
            violations.append(Violation(where, "passenger-id", f"expected {index}, got {p.id}"))
            continue
        if p.bid < 0:
            violations.append(Violation(where, "negative-bid", str(p.id)))
        if p.max_pickup_time < inst.depart_time:
            violations.append(Violation(where, "pickup-before-departure", str(p.id)))
        if p.max_travel_time < 0:
            violations.append(Violation(where, "negative-duration", str(p.id)))
        elif time_shape_ok and p.id <= inst.n:
            if p.max_travel_time < inst.travel_time[p.id][p.id + inst.n]:
                violations.append(Violation(where, "infeasible-travel-window", str(p.id)))

    if inst.geometry is not None and not time_problems and not cost_problems:
        for name, matrix in (("travel_time", inst.travel_time), ("travel_cost", inst.travel_cost)):
            if not satisfies_triangle_inequality(matrix):
                violations.append(Violation(name, "triangle-inequality"))

    return violations


def satisfies_triangle_inequality(matrix: Sequence[Sequence[int]]) -> bool:
    """True when m[i][j] <= m[i][k] + m[k][j] for every triple"""
    if not len(matrix):
        return True
    # Python ints beyond the int64-safe range
    wide = any(abs(x) > MATRIX_ENTRY_BOUND for row in matrix for x in row)
    m = np.asarray(matrix, dtype=object if wide else np.int64)
    for k in range(m.shape[0]):
        if np.any(m[:, k, None] + m[None, k, :] < m):
            return False
    return True


# ==================== PASSENGER COSTS ====================

def _require_passenger(inst: Instance, i: int) -> None:
    if not 1 <= i <= inst.n:
        raise PassengerIndexError(i, inst.n)


def direct_distance(inst: Instance, i: int) -> int:
    """d_i: cost of driving straight from pickup to dropoff"""
    _require_passenger(inst, i)
    return inst.travel_cost[i][i + inst.n]


def round_trip_cost(inst: Instance, i: int) -> int:
    """
    r_i: cheapest loop serving i alone, anchored at the driver origin
    or at the driver destination.
    """
    _require_passenger(inst, i)
    c = inst.travel_cost
    pickup, dropoff, dest = i, i + inst.n, inst.destination
    from_origin = c[0][pickup] + c[pickup][dropoff] + c[dropoff][0]
    from_destination = c[dest][pickup] + c[pickup][dropoff] + c[dropoff][dest]
    return min(from_origin, from_destination)


# ==================== EUCLIDEAN GEOMETRY ====================

def _ceil_sqrt(value: Fraction) -> int:
    """Smallest integer r >= 0 with r * r >= value"""
    target = math.ceil(value)
    if target <= 0:
        return 0
    root = math.isqrt(target)
    return root if root * root == target else root + 1


def expand_euclidean(geometry: EuclideanGeometry) -> Tuple[List[List[int]], List[List[int]]]:
    """
    Travel time and cost matrices for a set of points.

    Times are rounded up to whole seconds and costs up to whole micro-units,
    both computed exactly, so the triangle inequality carries over.
    """
    points = [(Fraction(x), Fraction(y)) for x, y in geometry.points]
    speed_sq = Fraction(geometry.speed_m_per_s) ** 2
    cost_sq = geometry.cost_per_m ** 2
    size = len(points)
    times = [[0] * size for _ in range(size)]
    costs = [[0] * size for _ in range(size)]
    for a in range(size):
        ax, ay = points[a]
        for b in range(a + 1, size):
            bx, by = points[b]
            dist_sq = (ax - bx) ** 2 + (ay - by) ** 2
            t = _ceil_sqrt(dist_sq / speed_sq)
            c = _ceil_sqrt(dist_sq * cost_sq)
            times[a][b] = times[b][a] = t
            costs[a][b] = costs[b][a] = c
    return times, costs


# ==================== FILE I/O ====================

def instance_from_document(data: Dict[str, Any]) -> Instance:
    """Build an instance from a parsed instance file document"""
    doc = validate_json_schema(data, InstanceFile)
    geometry = doc.geometry
    if isinstance(geometry, EuclideanGeometry):
        travel_time, travel_cost = expand_euclidean(geometry)
        source = geometry
    else:
        travel_time, travel_cost = geometry.travel_time, geometry.travel_cost
        source = None
    passengers = [PassengerRequest(**p.dict()) for p in doc.passengers]
    inst = Instance(
        n=doc.n,
        passengers=passengers,
        travel_time=travel_time,
        travel_cost=travel_cost,
        depart_time=doc.depart_time,
        max_arrival=doc.max_arrival,
        capacity=doc.capacity,
        cost_mode=doc.cost_mode,
        geometry=source,
    )
    # Check the rules the file schema cannot express
    violations = validate_instance(inst)
    if violations:
        logger.error(f"Instance rejected with {len(violations)} violations")
        raise ValueError(f"Invalid instance: {'; '.join(str(v) for v in violations)}")
    return inst


def instance_to_document(inst: Instance) -> Dict[str, Any]:
    if inst.geometry is not None:
        geometry: Union[EuclideanGeometry, MatrixGeometry] = inst.geometry
    else:
        geometry = MatrixGeometry(travel_time=inst.travel_time, travel_cost=inst.travel_cost)
    doc = InstanceFile(
        n=inst.n,
        depart_time=inst.depart_time,
        max_arrival=inst.max_arrival,
        capacity=inst.capacity,
        cost_mode=inst.cost_mode,
        geometry=geometry,
        passengers=[p.dict() for p in inst.passengers],
    )
    return json.loads(doc.json())


def load_instance(path: Union[str, Path]) -> Instance:
    path = Path(path)
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    inst = instance_from_document(data)
    logger.debug(f"Loaded instance {path.name} with {inst.n} passengers")
    return inst


def save_instance(inst: Instance, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(instance_to_document(inst), f, indent=1, sort_keys=True)
        f.write('\n')
    return path
