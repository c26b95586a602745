"""
Auction mechanisms over a trip family

UMS and WMS pick the trip with the best (weighted) minimum surplus, VCG_s
the best surplus welfare and VCG the best welfare. Every winner pays its
critical value, computed exactly with Fractions.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from models.errors import MechanismError
from models.schemas import Mechanism, OutcomeDocument
from utils.rationals import Rational
from utils.validators import sanitize_for_json

from .alternatives import Alternative, AlternativeFamily, tie_break_key

logger = logging.getLogger(__name__)


# ==================== OUTCOME TYPES ====================

@dataclass(frozen=True)
class Metrics:
    profit: Fraction
    welfare: Fraction
    surplus_welfare: Fraction
    surplus_profit: Fraction
    passengers: int

    def as_dict(self) -> Dict[str, Fraction]:
        return {
            'profit': self.profit,
            'welfare': self.welfare,
            'surplus_welfare': self.surplus_welfare,
            'surplus_profit': self.surplus_profit,
            'passengers': Fraction(self.passengers),
        }


@dataclass(frozen=True)
class WinnerDiagnostics:
    """Terms behind one winner's price; only the fields of its mechanism are set"""
    passenger: int
    premium: Fraction
    ss: Optional[Fraction] = None
    wm_star: Optional[Fraction] = None
    a_prime: Optional[Tuple[int, ...]] = None
    a_prime_simple_size: Optional[int] = None
    pivot_max: Optional[Fraction] = None
    pivot_at_winner: Optional[Fraction] = None

    def values(self) -> Dict[str, object]:
        names = ('ss', 'wm_star', 'a_prime', 'a_prime_simple_size', 'pivot_max', 'pivot_at_winner')
        return {name: getattr(self, name) for name in names if getattr(self, name) is not None}

    @property
    def a_prime_mismatch(self) -> bool:
        """True when the simple |A'_i| disagrees with the general one"""
        return self.a_prime is not None and self.a_prime_simple_size != len(self.a_prime)


@dataclass(frozen=True)
class AuctionOutcome:
    mechanism: Mechanism
    winner: Alternative
    prices: Dict[int, Fraction]
    diagnostics: Dict[int, WinnerDiagnostics] = field(default_factory=dict)
    metrics: Optional[Metrics] = None

    def price(self, passenger: int) -> Fraction:
        return self.prices.get(passenger, Fraction(0))

    def a_prime_mismatches(self) -> List[int]:
        """Winners whose two A'_i definitions give different sizes"""
        return [i for i, d in sorted(self.diagnostics.items()) if d.a_prime_mismatch]

    def wins(self, passenger: int) -> bool:
        return passenger in self.winner.members

    @property
    def total_price(self) -> Fraction:
        return sum((self.prices[i] for i in self.winner.members), Fraction(0))


# ==================== HELPERS ====================

def _select(alternatives, objective: Dict[Tuple[int, ...], Rational]) -> Alternative:
    return min(alternatives, key=lambda a: tie_break_key(a, objective[a.members]))


def surplus_metrics(outcome: AuctionOutcome, family: AlternativeFamily) -> Metrics:
    """Profit, welfare and their surplus counterparts for the winning trip"""
    winner = outcome.winner
    costs = sum(family.costs[i] for i in winner.members)
    paid = outcome.total_price
    surplus_welfare = Fraction(winner.surplus_welfare)
    return Metrics(
        profit=paid - winner.cost,
        welfare=surplus_welfare + costs - winner.cost,
        surplus_welfare=surplus_welfare,
        surplus_profit=paid - costs,
        passengers=winner.size,
    )


def _finish(mechanism: Mechanism, family: AlternativeFamily, winner: Alternative,
            prices: Dict[int, Fraction], diagnostics: Dict[int, WinnerDiagnostics]) -> AuctionOutcome:
    all_prices = {i: Fraction(0) for i in family.passengers}
    all_prices.update(prices)
    outcome = AuctionOutcome(mechanism, winner, all_prices, diagnostics)
    metrics = surplus_metrics(outcome, family)
    return AuctionOutcome(mechanism, winner, all_prices, diagnostics, metrics)


# ==================== MECHANISMS ====================

def run_ums(family: AlternativeFamily) -> AuctionOutcome:
    """Unweighted minimum surplus: maximize s_min, charge c_i + ss_i"""
    alternatives = family.alternatives
    s_min = {a.members: a.s_min for a in alternatives}
    winner = _select(alternatives, s_min)

    prices, diagnostics = {}, {}
    for i in winner.members:
        ss = Fraction(max(0, max(s_min[a.members] for a in alternatives if i not in a.members)))
        prices[i] = family.costs[i] + ss
        diagnostics[i] = WinnerDiagnostics(i, premium=ss, ss=ss)
    return _finish(Mechanism.UMS, family, winner, prices, diagnostics)


def _a_prime(family: AlternativeFamily, i: int, wm_star: Rational,
             wm: Dict[Tuple[int, ...], Rational]) -> Alternative:
    """
    Largest trip containing i whose other members could still carry a
    weighted minimum of wm_star; ties at exactly wm_star must also beat
    every rival without i that reaches it.
    """
    alternatives = family.alternatives
    # Trips without i that already reach wm_star
    rivals = [a for a in alternatives if i not in a.members and wm[a.members] == wm_star]
    candidates = []
    for a in alternatives:
        if i not in a.members or a.size < 2:
            continue
        # Highest weighted minimum the trip reaches as i's surplus varies
        rest = min(s for j, s in zip(a.members, a.surpluses) if j != i)
        reach = a.size * rest
        if wm_star < reach:
            candidates.append(a)
        elif wm_star == reach and all(
                tie_break_key(a, wm_star) < tie_break_key(r, wm_star) for r in rivals):
            candidates.append(a)
    # Largest candidate first, singleton as the fallback
    if candidates:
        return min(candidates, key=lambda a: (-a.size, a.members))
    single = family.find((i,))
    if single is not None:
        return single
    raise MechanismError(f"no A'_{i} for winner {i} (wm*={wm_star})")


def run_wms(family: AlternativeFamily) -> AuctionOutcome:
    """Weighted minimum surplus: maximize |A| s_min(A), charge c_i + wm*_i / |A'_i|"""
    alternatives = family.alternatives
    wm = {a.members: a.wm for a in alternatives}
    winner = _select(alternatives, wm)

    prices, diagnostics = {}, {}
    for i in winner.members:
        wm_star = max(0, max(wm[a.members] for a in alternatives if i not in a.members))
        a_prime = _a_prime(family, i, wm_star, wm)
        # Compare with the simple definition; the general one sets the price
        simple = max(a.size for a in alternatives if i in a.members and wm_star <= wm[a.members])
        if simple != a_prime.size:
            logger.debug(
                f"|A'_{i}| differs between definitions: general {a_prime.size} "
                f"({a_prime.members}), simple {simple}"
            )
        premium = Fraction(wm_star) / a_prime.size
        prices[i] = family.costs[i] + premium
        diagnostics[i] = WinnerDiagnostics(
            i, premium=premium, wm_star=Fraction(wm_star),
            a_prime=a_prime.members, a_prime_simple_size=simple,
        )
    return _finish(Mechanism.WMS, family, winner, prices, diagnostics)


def run_vcgs(family: AlternativeFamily) -> AuctionOutcome:
    """VCG on surpluses: maximize surplus welfare, charge c_i plus the surplus externality"""
    alternatives = family.alternatives
    vs = {a.members: a.surplus_welfare for a in alternatives}
    winner = _select(alternatives, vs)

    prices, diagnostics = {}, {}
    for i in winner.members:
        pivot = max(vs[a.members] - (a.surplus_of(i) if i in a.members else 0) for a in alternatives)
        at_winner = vs[winner.members] - winner.surplus_of(i)
        premium = Fraction(pivot - at_winner)
        prices[i] = family.costs[i] + premium
        diagnostics[i] = WinnerDiagnostics(
            i, premium=premium, pivot_max=Fraction(pivot), pivot_at_winner=Fraction(at_winner),
        )
    return _finish(Mechanism.VCGS, family, winner, prices, diagnostics)


def run_vcg(family: AlternativeFamily, include_driver_cost: bool = True) -> AuctionOutcome:
    """
    Clarke-pivot VCG on welfare sum(b) - cost(A). Meant for the zero-cost
    family; makes no attempt to cover the driver's cost.
    """
    alternatives = family.alternatives
    costs = family.costs

    def value(a: Alternative) -> Rational:
        total = sum((s + costs[j] for j, s in zip(a.members, a.surpluses)), 0)
        return total - a.cost if include_driver_cost else total

    v = {a.members: value(a) for a in alternatives}
    winner = _select(alternatives, v)

    prices, diagnostics = {}, {}
    for i in winner.members:
        pivot = max(v[a.members] - (a.surplus_of(i) + costs[i] if i in a.members else 0) for a in alternatives)
        at_winner = v[winner.members] - (winner.surplus_of(i) + costs[i])
        price = Fraction(pivot - at_winner)
        prices[i] = price
        diagnostics[i] = WinnerDiagnostics(
            i, premium=price - costs[i], pivot_max=Fraction(pivot), pivot_at_winner=Fraction(at_winner),
        )
    return _finish(Mechanism.VCG, family, winner, prices, diagnostics)


MECHANISMS: Dict[Mechanism, Callable[[AlternativeFamily], AuctionOutcome]] = {
    Mechanism.UMS: run_ums,
    Mechanism.WMS: run_wms,
    Mechanism.VCG: run_vcg,
    Mechanism.VCGS: run_vcgs,
}


def run_mechanism(mechanism: Union[Mechanism, str], family: AlternativeFamily) -> AuctionOutcome:
    return MECHANISMS[Mechanism(mechanism)](family)


def vcgs_critical_value(family: AlternativeFamily, i: int) -> Optional[Fraction]:
    """
    Bid at which i starts winning under VCG_s, for winners and losers alike;
    None when no trip containing i can become active.
    """
    rivals = max(a.surplus_welfare for a in family.alternatives if i not in a.members)
    reach = []
    for a in family.pool:
        if i not in a.members:
            continue
        others = [s for j, s in zip(a.members, a.surpluses) if j != i]
        if all(s >= 0 for s in others):
            reach.append(sum(others, 0))
    if not reach:
        return None
    return Fraction(family.costs[i] + max(0, rivals - max(reach)))


# ==================== SERIALIZATION ====================

def outcome_to_document(outcome: AuctionOutcome) -> OutcomeDocument:
    metrics = outcome.metrics.as_dict() if outcome.metrics else {}
    diagnostics = [
        {
            'passenger': d.passenger,
            'premium': sanitize_for_json(d.premium),
            'values': sanitize_for_json(d.values()),
        }
        for _, d in sorted(outcome.diagnostics.items())
    ]
    return OutcomeDocument(
        mechanism=outcome.mechanism,
        winner=list(outcome.winner.members),
        winner_cost=outcome.winner.cost,
        prices={i: sanitize_for_json(p) for i, p in sorted(outcome.prices.items())},
        diagnostics=diagnostics,
        metrics={k: sanitize_for_json(v) for k, v in metrics.items()},
    )
