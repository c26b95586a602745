"""
Trip families: passenger cost policies, enumeration of feasible trips,
abstract families and the bid-independent tie-break order.
"""
import json
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from models.errors import DuplicateAlternativeError, MechanismError
from models.instance import direct_distance, round_trip_cost, satisfies_triangle_inequality
from models.schemas import AbstractFamilyFile, CostPolicy, Instance
from utils.rationals import Rational
from utils.validators import validate_json_schema

from .routing import Route, best_route, trip_cost

logger = logging.getLogger(__name__)

CONCRETE = "concrete"
ABSTRACT = "abstract"


# ==================== TYPES ====================

@dataclass(frozen=True)
class Alternative:
    """A trip: sorted member ids, cost(A) and the surplus of each member"""
    members: Tuple[int, ...]
    cost: int
    surpluses: Tuple[Rational, ...] = ()
    route: Optional[Route] = None

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_empty(self) -> bool:
        return not self.members

    def surplus_of(self, passenger: int) -> Rational:
        return self.surpluses[self.members.index(passenger)]

    @property
    def surplus_map(self) -> Dict[int, Rational]:
        return dict(zip(self.members, self.surpluses))

    @property
    def s_min(self) -> Rational:
        """Smallest member surplus; 0 for the empty trip"""
        return min(self.surpluses) if self.surpluses else 0

    @property
    def wm(self) -> Rational:
        return self.size * self.s_min

    @property
    def surplus_welfare(self) -> Rational:
        return sum(self.surpluses, 0)

    @property
    def is_active(self) -> bool:
        return all(s >= 0 for s in self.surpluses)

    def shifted(self, passenger: int, delta: Rational) -> "Alternative":
        pos = self.members.index(passenger)
        surpluses = list(self.surpluses)
        surpluses[pos] = surpluses[pos] + delta
        return replace(self, surpluses=tuple(surpluses))

    def without(self, passenger: int) -> Tuple[int, ...]:
        return tuple(m for m in self.members if m != passenger)


EMPTY = Alternative(members=(), cost=0)


@dataclass(frozen=True)
class CostAssignment:
    policy: CostPolicy
    costs: Mapping[int, int]

    def __getitem__(self, passenger: int) -> int:
        return self.costs.get(passenger, 0)

    def total(self, members: Iterable[int]) -> int:
        return sum(self[i] for i in members)


@dataclass(frozen=True)
class AlternativeFamily:
    """
    Set of candidate trips under one bid profile.

    pool holds every structurally feasible nonempty trip with surpluses at
    the current bids; alternatives is the active subset (no negative
    surplus) plus the empty trip, which is what the auctions see.
    """
    pool: Tuple[Alternative, ...]
    costs: CostAssignment
    bids: Mapping[int, Rational]
    provenance: str = CONCRETE
    pruned: FrozenSet[int] = field(default_factory=frozenset)

    @cached_property
    def alternatives(self) -> Tuple[Alternative, ...]:
        return tuple(a for a in self.pool if a.is_active) + (EMPTY,)

    @property
    def passengers(self) -> Tuple[int, ...]:
        return tuple(sorted(self.bids))

    @cached_property
    def max_size(self) -> int:
        return max((a.size for a in self.alternatives), default=0)

    def find(self, members: Iterable[int]) -> Optional[Alternative]:
        key = tuple(sorted(members))
        if not key:
            return EMPTY
        for a in self.alternatives:
            if a.members == key:
                return a
        return None

    def with_bid(self, passenger: int, bid: Rational) -> "AlternativeFamily":
        """
        Same family after a unilateral bid change: trips stay, surpluses of
        the passenger's trips move with the bid.
        """
        if passenger in self.pruned:
            raise MechanismError(
                f"passenger {passenger} was pruned from the pool; rebuild with prune_unaffordable=False"
            )
        if passenger not in self.bids:
            raise MechanismError(f"passenger {passenger} is not part of this family")
        delta = bid - self.bids[passenger]
        pool = tuple(a.shifted(passenger, delta) if passenger in a.members else a for a in self.pool)
        bids = dict(self.bids)
        bids[passenger] = bid
        return replace(self, pool=pool, bids=bids)


class DownwardClosure(NamedTuple):
    closed: bool
    witness: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None


# ==================== COSTS ====================

def assign_costs(inst: Instance, policy: Union[CostPolicy, str]) -> CostAssignment:
    """Passenger costs c_i; depend on geometry only"""
    policy = CostPolicy(policy)
    passengers = range(1, inst.n + 1)
    if policy == CostPolicy.ZERO:
        costs = {i: 0 for i in passengers}
    elif policy == CostPolicy.DIRECT:
        costs = {i: direct_distance(inst, i) for i in passengers}
    else:
        costs = {i: round_trip_cost(inst, i) for i in passengers}
    return CostAssignment(policy, costs)


# ==================== ENUMERATION ====================

def _sort_key(alt: Alternative):
    return (alt.size, alt.members)


def enumerate_alternatives(
    inst: Instance,
    costs: CostAssignment,
    policy: Optional[Union[CostPolicy, str]] = None,
    prune_unaffordable: bool = True,
    route_cache: Optional[Dict[Tuple[int, ...], Optional[Route]]] = None,
) -> AlternativeFamily:
    """
    Every trip of up to Q passengers that can be routed and, except under
    the zero policy, whose passenger costs cover cost(A).

    With prune_unaffordable the passengers bidding below their cost are
    left out of the pool entirely; without it they stay in and their trips
    are merely inactive, so the family can be re-derived for any bid.
    Families of one instance may share a route_cache.
    """
    policy = CostPolicy(policy) if policy is not None else costs.policy
    bids = inst.bids()
    eligible = [i for i in range(1, inst.n + 1) if not prune_unaffordable or bids[i] >= costs[i]]
    pruned = frozenset(range(1, inst.n + 1)) - frozenset(eligible)
    # routing feasibility is closed under subsets when travel times are metric
    metric = satisfies_triangle_inequality(inst.travel_time)

    routable = set()
    pool: List[Alternative] = []
    rejected_budget = 0
    for size in range(1, min(inst.capacity, len(eligible)) + 1):
        for combo in combinations(eligible, size):
            if metric and size > 1 and any(sub not in routable for sub in combinations(combo, size - 1)):
                continue
            if route_cache is None:
                route = best_route(inst, combo)
            elif combo in route_cache:
                route = route_cache[combo]
            else:
                route = route_cache[combo] = best_route(inst, combo)
            if route is None:
                logger.debug(f"No feasible route for {combo}")
                continue
            routable.add(combo)
            cost = trip_cost(route, inst.cost_mode)
            if policy != CostPolicy.ZERO and costs.total(combo) < cost:
                rejected_budget += 1
                continue
            surpluses = tuple(bids[i] - costs[i] for i in combo)
            pool.append(Alternative(combo, cost, surpluses, route))

    pool.sort(key=_sort_key)
    logger.debug(
        f"Family under {policy.value}: {len(pool)} trips, {len(routable)} routable, "
        f"{rejected_budget} over budget, {len(pruned)} passengers pruned"
    )
    return AlternativeFamily(
        pool=tuple(pool),
        costs=CostAssignment(policy, dict(costs.costs)),
        bids=dict(bids),
        provenance=CONCRETE,
        pruned=pruned,
    )


def build_family(inst: Instance, policy: Union[CostPolicy, str], prune_unaffordable: bool = True,
                 route_cache: Optional[Dict[Tuple[int, ...], Optional[Route]]] = None) -> AlternativeFamily:
    return enumerate_alternatives(inst, assign_costs(inst, policy), policy, prune_unaffordable, route_cache)


# ==================== ABSTRACT FAMILIES ====================

AbstractEntry = Union[
    Tuple[Iterable[int], Mapping[int, Rational]],
    Tuple[Iterable[int], Mapping[int, Rational], int],
]


def make_abstract_family(
    spec: Sequence[AbstractEntry],
    costs: Optional[Mapping[int, int]] = None,
) -> AlternativeFamily:
    """
    Family from explicit member sets and surpluses, without routing.

    Each entry is (members, {id: surplus}) or (members, {id: surplus}, cost).
    Bids are recovered as c_i + s_i from the first trip containing i.
    """
    costs = dict(costs or {})
    seen = set()
    pool: List[Alternative] = []
    bids: Dict[int, Rational] = {}
    for entry in spec:
        members, surpluses = entry[0], entry[1]
        trip_cost_value = entry[2] if len(entry) > 2 else 0
        key = tuple(sorted(members))
        if not key:
            continue
        if key in seen:
            raise DuplicateAlternativeError(key)
        seen.add(key)
        values = tuple(surpluses[i] for i in key)
        pool.append(Alternative(key, trip_cost_value, values))
        for i, s in zip(key, values):
            bids.setdefault(i, costs.get(i, 0) + s)
    for i in costs:
        bids.setdefault(i, costs[i])
    for i in bids:
        costs.setdefault(i, 0)
    pool.sort(key=_sort_key)
    return AlternativeFamily(
        pool=tuple(pool),
        costs=CostAssignment(CostPolicy.DIRECT, costs),
        bids=bids,
        provenance=ABSTRACT,
    )


def load_abstract_family(path: Union[str, Path]) -> AlternativeFamily:
    with open(path, 'r', encoding='utf-8') as f:
        doc = validate_json_schema(json.load(f), AbstractFamilyFile)
    spec = [(a.members, a.surpluses, a.cost) for a in doc.alternatives]
    return make_abstract_family(spec, doc.costs)


# ==================== STRUCTURE ====================

def is_downward_closed(family: AlternativeFamily) -> DownwardClosure:
    """Every subset of every trip is itself a trip (the empty set always is)"""
    present = {a.members for a in family.alternatives}
    for alt in family.alternatives:
        if alt.size < 2:
            continue
        for sub in combinations(alt.members, alt.size - 1):
            if sub not in present:
                return DownwardClosure(False, (alt.members, sub))
    return DownwardClosure(True)


def tie_break_key(alt: Alternative, objective: Rational):
    """Smaller key ranks first: higher objective, then more members, then lexicographic ids"""
    return (-objective, -alt.size, alt.members)


def tie_break_cmp(a: Alternative, b: Alternative, objective_a: Rational, objective_b: Rational) -> int:
    """-1 if a ranks ahead of b, 1 if behind, 0 for the same trip"""
    key_a = tie_break_key(a, objective_a)
    key_b = tie_break_key(b, objective_b)
    if key_a < key_b:
        return -1
    if key_a > key_b:
        return 1
    return 0
