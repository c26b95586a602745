"""
Deviation sweeps: does any unilateral misreport raise a passenger's utility?
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from models.schemas import CostPolicy, Instance, Mechanism
from phases.alternatives import AlternativeFamily, build_family, make_abstract_family
from phases.auctions import MECHANISMS, run_wms
from utils.rationals import Rational

logger = logging.getLogger(__name__)

GRID_STEPS = 20

# Mechanism and cost policy pairs swept on concrete instances
SWEEP_COMBOS: Tuple[Tuple[Mechanism, CostPolicy], ...] = tuple(
    (m, p) for p in CostPolicy for m in (Mechanism.UMS, Mechanism.WMS, Mechanism.VCGS)
) + ((Mechanism.VCG, CostPolicy.ZERO),)


@dataclass(frozen=True)
class DeviationViolation:
    mechanism: str
    passenger: int
    value: Rational
    deviation: Rational
    truthful_utility: Fraction
    deviated_utility: Fraction
    policy: Optional[str] = None
    seed: Optional[int] = None

    def __str__(self) -> str:
        where = f" seed={self.seed}" if self.seed is not None else ""
        policy = f"/{self.policy}" if self.policy else ""
        return (f"{self.mechanism}{policy}{where}: passenger {self.passenger} value {self.value} "
                f"gains by bidding {self.deviation} ({self.truthful_utility} -> {self.deviated_utility})")


def utility(mechanism, family: AlternativeFamily, i: int, value: Rational, bid: Rational) -> Fraction:
    """v_i - p_i when i wins with the given bid, else 0"""
    outcome = MECHANISMS[Mechanism(mechanism)](family.with_bid(i, bid))
    if i in outcome.winner.members:
        return Fraction(value) - outcome.prices[i]
    return Fraction(0)


def deviation_grid(family: AlternativeFamily, i: int, mechanism, step: Optional[int] = None) -> List[Rational]:
    """
    Integer bids 0..2*max bid at the given step, plus the passenger's price
    as a winner and one micro-unit either side of it.
    """
    max_bid = int(max(family.bids.values(), default=0))
    top = 2 * max_bid
    step = step or max(1, max_bid // GRID_STEPS)
    grid = set(range(0, top + 1, step))
    grid.add(top)
    # a winner's price does not depend on its own bid
    high = family.with_bid(i, top + 1)
    outcome = MECHANISMS[Mechanism(mechanism)](high)
    if i in outcome.winner.members:
        price = outcome.prices[i]
        grid.update(b for b in (price - 1, price, price + 1) if b >= 0)
    return sorted(grid)


def check_strategyproofness(
    mechanism: Union[Mechanism, str],
    family: AlternativeFamily,
    step: Optional[int] = None,
    seed: Optional[int] = None,
    policy: Optional[str] = None,
) -> List[DeviationViolation]:
    """
    Every passenger's truthful utility (bids taken as values) against every
    bid on the deviation grid.
    """
    mechanism = Mechanism(mechanism)
    violations = []
    for i in family.passengers:
        if i in family.pruned:
            continue
        value = family.bids[i]
        truthful = utility(mechanism, family, i, value, value)
        for bid in deviation_grid(family, i, mechanism, step):
            deviated = utility(mechanism, family, i, value, bid)
            if deviated > truthful:
                violations.append(DeviationViolation(
                    mechanism.value, i, value, bid, truthful, deviated, policy, seed))
                logger.debug(f"Violation: {violations[-1]}")
    return violations


def check_instance_strategyproofness(inst: Instance, seed: Optional[int] = None,
                                     step: Optional[int] = None) -> List[DeviationViolation]:
    """Sweep every mechanism on each cost policy it runs under"""
    families: Dict[CostPolicy, AlternativeFamily] = {}
    violations = []
    for mechanism, policy in SWEEP_COMBOS:
        if policy not in families:
            families[policy] = build_family(inst, policy, prune_unaffordable=False)
        violations.extend(check_strategyproofness(mechanism, families[policy], step, seed, policy.value))
    return violations


# ==================== TRIP-DEPENDENT COSTS ====================

class TripDependentCostHarness:
    """
    WMS where passenger i's cost depends on the trip: s_i(A) = b_i - c_i(A)
    and a winner pays c_i(A*) plus the usual premium.

    Strategy-proofness does not survive this; sweeping it must turn up a
    profitable misreport.
    """

    def __init__(self, values: Mapping[int, int], trip_costs: Mapping[Tuple[int, ...], Mapping[int, int]]):
        self.values = dict(values)
        self.trip_costs = {tuple(sorted(k)): dict(v) for k, v in trip_costs.items()}

    @classmethod
    def standard(cls) -> "TripDependentCostHarness":
        """Two passengers; passenger 1 is cheap to serve alone and expensive to pool"""
        return cls(values={1: 11, 2: 10}, trip_costs={(1, 2): {1: 6, 2: 1}, (1,): {1: 2}})

    def family(self, bids: Mapping[int, Rational]) -> AlternativeFamily:
        spec = [
            (members, {j: bids[j] - costs[j] for j in members})
            for members, costs in self.trip_costs.items()
        ]
        return make_abstract_family(spec, {j: 0 for j in self.values})

    def utility(self, i: int, bid: Rational) -> Fraction:
        bids = dict(self.values)
        bids[i] = bid
        outcome = run_wms(self.family(bids))
        if i not in outcome.winner.members:
            return Fraction(0)
        price = self.trip_costs[outcome.winner.members][i] + outcome.diagnostics[i].premium
        return Fraction(self.values[i]) - price

    def find_violations(self, step: int = 1) -> List[DeviationViolation]:
        violations = []
        top = 2 * max(self.values.values())
        for i, value in sorted(self.values.items()):
            truthful = self.utility(i, value)
            for bid in range(0, top + 1, step):
                deviated = self.utility(i, bid)
                if deviated > truthful:
                    violations.append(DeviationViolation(
                        Mechanism.WMS.value, i, value, bid, truthful, deviated, "trip_dependent"))
        return violations
