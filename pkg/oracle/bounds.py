"""
Welfare and profit guarantees, plus the family constructions that
reach or break them.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np

from models.errors import DivisibilityError
from models.schemas import CostMode, CostPolicy, Instance, PassengerRequest
from phases.alternatives import AlternativeFamily, build_family, is_downward_closed, make_abstract_family
from phases.auctions import AuctionOutcome, run_ums, run_wms
from utils.rationals import harmonic

logger = logging.getLogger(__name__)


# ==================== REPORTS ====================

@dataclass(frozen=True)
class ProfitBoundReport:
    """Surplus-profit lower bounds and whether their hypotheses hold"""
    surplus_profit: Fraction
    winner_bound_applies: bool
    winner_bound: Fraction
    family_bound_applies: bool
    family_bound: Fraction

    @property
    def winner_bound_margin(self) -> Fraction:
        return self.surplus_profit - self.winner_bound

    @property
    def family_bound_margin(self) -> Fraction:
        return self.surplus_profit - self.family_bound

    @property
    def winner_bound_holds(self) -> Optional[bool]:
        return self.winner_bound_margin >= 0 if self.winner_bound_applies else None

    @property
    def family_bound_holds(self) -> Optional[bool]:
        return self.family_bound_margin >= 0 if self.family_bound_applies else None


@dataclass(frozen=True)
class UmsWmsReport:
    hypotheses_met: bool
    wms_surplus_payment: Fraction
    ums_surplus_payment: Fraction
    reason: str = ""

    @property
    def holds(self) -> Optional[bool]:
        if not self.hypotheses_met:
            return None
        return self.wms_surplus_payment >= self.ums_surplus_payment


# ==================== CHECKS ====================

def max_surplus_welfare(family: AlternativeFamily) -> Fraction:
    return Fraction(max(a.surplus_welfare for a in family.alternatives))


def check_welfare_ratio(outcome: AuctionOutcome, family: AlternativeFamily) -> Optional[Fraction]:
    """max V_s over the family divided by V_s of the winner; None when the winner has none"""
    obtained = Fraction(outcome.winner.surplus_welfare)
    if obtained == 0:
        return None
    return max_surplus_welfare(family) / obtained


def check_profit_bound(outcome: AuctionOutcome, family: AlternativeFamily) -> ProfitBoundReport:
    """
    Surplus profit against V_s(A*)/max|A| (winner has at least two members
    and each of its one-smaller subsets is a trip) and against
    max V_s / (H_k k) with k = max|A| (family downward closed).
    """
    winner = outcome.winner
    k = max(1, family.max_size)
    surplus_profit = outcome.metrics.surplus_profit
    present = {a.members for a in family.alternatives}
    winner_applies = winner.size >= 2 and all(winner.without(i) in present for i in winner.members)
    family_applies = winner.size >= 2 and is_downward_closed(family).closed
    return ProfitBoundReport(
        surplus_profit=surplus_profit,
        winner_bound_applies=winner_applies,
        winner_bound=Fraction(winner.surplus_welfare) / k,
        family_bound_applies=family_applies,
        family_bound=max_surplus_welfare(family) / (harmonic(k) * k),
    )


def check_ums_vs_wms(family: AlternativeFamily) -> UmsWmsReport:
    """
    Surplus payment of the WMS winner against that of the UMS winner, when
    the winners are disjoint and every |A'_i| equals the WMS winner size.
    """
    wms = run_wms(family)
    ums = run_ums(family)
    sp_wms = wms.metrics.surplus_profit
    sp_ums = ums.metrics.surplus_profit

    def report(met: bool, reason: str = "") -> UmsWmsReport:
        return UmsWmsReport(met, sp_wms, sp_ums, reason)

    if wms.winner.is_empty or ums.winner.is_empty:
        return report(False, "empty winner")
    if set(wms.winner.members) & set(ums.winner.members):
        return report(False, "winners share passengers")
    if any(len(d.a_prime) != wms.winner.size for d in wms.diagnostics.values()):
        return report(False, "A' size differs from winner size")
    return report(True)


def check_budget_balance(outcome: AuctionOutcome, family: AlternativeFamily, chain: bool = False) -> bool:
    """
    Prices cover cost(A*). With chain, also that prices cover the passenger
    costs and those cover cost(A*).
    """
    winner = outcome.winner
    paid = outcome.total_price
    if paid < winner.cost:
        return False
    if chain:
        reserved = sum(family.costs[i] for i in winner.members)
        return paid >= reserved >= winner.cost
    return True


# ==================== CONSTRUCTIONS ====================

def tightness_family(size: int, wm_b: int) -> AlternativeFamily:
    """
    Downward-closed family on which WMS loses exactly H_size of the best
    surplus welfare.

    C holds ids 1..size with surplus wm_b/size each; B holds ids
    size+1..2*size with surpluses wm_b/1 .. wm_b/size. The family is every
    nonempty subset of B and of C; both reach wm_b and C takes the tie on
    its smaller ids.
    """
    if size < 1:
        raise ValueError("size must be at least 1")
    lcm = math.lcm(*range(1, size + 1))
    if wm_b <= 0 or wm_b % lcm:
        raise DivisibilityError(f"wm_b={wm_b} must be a positive multiple of {lcm}")
    c_members = {j: wm_b // size for j in range(1, size + 1)}
    b_members = {size + j: wm_b // j for j in range(1, size + 1)}
    spec = []
    for group in (c_members, b_members):
        ids = sorted(group)
        for r in range(1, size + 1):
            for subset in combinations(ids, r):
                spec.append((subset, {j: group[j] for j in subset}))
    return make_abstract_family(spec, {j: 0 for j in (*c_members, *b_members)})


def non_closed_family(n: int) -> AlternativeFamily:
    """
    Two trips, {1,2} with surpluses (n, 1) and {3} with surplus 3: not
    downward closed, and WMS keeps only 3 of the n+1 available.
    """
    return make_abstract_family(
        [((1, 2), {1: n, 2: 1}), ((3,), {3: 3})],
        {1: 0, 2: 0, 3: 0},
    )


def budget_counterexample_instance() -> Instance:
    """
    Two passengers with direct costs 1 and 2 where serving 1 alone detours
    by 2 but serving both detours by only 3.
    """
    far = 100
    cost = [[0 if a == b else far for b in range(6)] for a in range(6)]
    for a, b, c in ((0, 5, 10), (0, 1, 5), (1, 3, 1), (3, 5, 6), (1, 2, 1),
                    (2, 3, 1), (3, 4, 1), (4, 5, 5), (2, 4, 2)):
        cost[a][b] = cost[b][a] = c
    time = [[0 if a == b else 1 for b in range(6)] for a in range(6)]
    passengers = [
        PassengerRequest(id=1, bid=5, max_pickup_time=100, max_travel_time=100),
        PassengerRequest(id=2, bid=5, max_pickup_time=100, max_travel_time=100),
    ]
    return Instance(n=2, passengers=passengers, travel_time=time, travel_cost=cost,
                    depart_time=0, max_arrival=100, capacity=3,
                    cost_mode=CostMode.RIDESHARING_DETOUR)


def budget_counterexample_family() -> AlternativeFamily:
    """Direct-cost family of budget_counterexample_instance: {1,2} is a trip, {1} is not"""
    return build_family(budget_counterexample_instance(), CostPolicy.DIRECT)


def vcg_loss_instance() -> Instance:
    """
    Two passengers bidding 10 whose joint detour costs 12; Clarke prices
    of 2 each leave the driver short.
    """
    # origin 0, pickups 1-2, dropoffs 3-4, destination 5 with c(0,5) = 0
    cost = [[0 if a == b else 20 for b in range(6)] for a in range(6)]
    for a, b, c in ((0, 1, 4), (1, 3, 3), (3, 5, 4), (0, 2, 4), (2, 4, 3), (4, 5, 4),
                    (1, 2, 1), (2, 3, 2), (3, 4, 1), (0, 5, 0)):
        cost[a][b] = cost[b][a] = c
    time = [[0 if a == b else 1 for b in range(6)] for a in range(6)]
    passengers = [
        PassengerRequest(id=1, bid=10, max_pickup_time=100, max_travel_time=100),
        PassengerRequest(id=2, bid=10, max_pickup_time=100, max_travel_time=100),
    ]
    return Instance(n=2, passengers=passengers, travel_time=time, travel_cost=cost,
                    depart_time=0, max_arrival=100, capacity=2,
                    cost_mode=CostMode.RIDESHARING_DETOUR)


def vcg_loss_family() -> AlternativeFamily:
    """Abstract version: cost({1,2}) = 12, cost({1}) = cost({2}) = 11, bids 10"""
    return make_abstract_family(
        [((1,), {1: 10}, 11), ((2,), {2: 10}, 11), ((1, 2), {1: 10, 2: 10}, 12)],
        {1: 0, 2: 0},
    )


def random_downward_closed_family(
    rng: np.random.Generator,
    max_passengers: int = 5,
    max_size: int = 4,
    max_surplus: int = 20,
) -> AlternativeFamily:
    """Subset closure of a few random generator trips over random surpluses"""
    n = int(rng.integers(2, max_passengers + 1))
    surpluses = {j: int(rng.integers(0, max_surplus + 1)) for j in range(1, n + 1)}
    sets = set()
    for _ in range(int(rng.integers(1, 4))):
        size = int(rng.integers(1, min(max_size, n) + 1))
        generator = tuple(sorted(int(x) + 1 for x in rng.choice(n, size=size, replace=False)))
        for r in range(1, size + 1):
            sets.update(combinations(generator, r))
    spec = [(members, {j: surpluses[j] for j in members}) for members in sorted(sets)]
    return make_abstract_family(spec, {j: 0 for j in surpluses})


def disjoint_winner_family(rng: np.random.Generator, max_surplus: int = 30) -> AlternativeFamily:
    """
    A multi-passenger trip A with all its subsets and a disjoint singleton
    B. Surpluses in A stay below |A| min s(A) / (|A| - 1) and s(B) sits
    between max s(A) and |A| min s(A), so WMS picks A, UMS picks B and
    every |A'_i| equals |A|.
    """
    k = int(rng.integers(2, 4))
    low = int(rng.integers(2, max_surplus + 1))
    top = min((k * low - 1) // (k - 1), k * low - 2)
    a_ids = tuple(range(1, k + 1))
    a_surplus = {j: int(rng.integers(low, top + 1)) for j in a_ids}
    a_surplus[int(rng.integers(1, k + 1))] = low
    b_id = k + 1
    b_surplus = int(rng.integers(max(a_surplus.values()) + 1, k * low))
    spec = [((b_id,), {b_id: b_surplus})]
    for r in range(1, k + 1):
        for subset in combinations(a_ids, r):
            spec.append((subset, {j: a_surplus[j] for j in subset}))
    return make_abstract_family(spec, {j: int(rng.integers(0, 5)) for j in (*a_ids, b_id)})
