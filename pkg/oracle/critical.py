"""
Empirical critical values: the bid at which a passenger starts winning,
found by bisection on integer micro-units and refined to the exact
rational threshold.
"""
import logging
import math
from fractions import Fraction
from typing import Callable, Optional, Tuple, Union

from models.errors import NonMonotoneError
from models.schemas import Mechanism
from phases.alternatives import AlternativeFamily
from phases.auctions import AuctionOutcome, MECHANISMS

logger = logging.getLogger(__name__)

# Returned when the passenger loses even at the top of the search range
NEVER_WINS = None

MechanismRunner = Callable[[AlternativeFamily], AuctionOutcome]

PROBES = 16


def _runner(mechanism: Union[Mechanism, str, MechanismRunner]) -> MechanismRunner:
    if callable(mechanism):
        return mechanism
    return MECHANISMS[Mechanism(mechanism)]


def default_search_range(family: AlternativeFamily, i: int) -> Tuple[int, int]:
    """
    [0, hi] with hi above any critical value the four mechanisms can produce
    on this family.
    """
    bids = sum(math.ceil(abs(b)) for b in family.bids.values())
    costs = sum(family.costs[j] for j in family.bids)
    worst_trip = max((a.cost for a in family.pool), default=0)
    return 0, (bids + costs + worst_trip) * max(1, _max_pool_size(family)) + family.costs[i] + 1


def _max_pool_size(family: AlternativeFamily) -> int:
    return max((a.size for a in family.pool), default=0)


def wins_at(mechanism, family: AlternativeFamily, i: int, bid) -> bool:
    return i in _runner(mechanism)(family.with_bid(i, bid)).winner.members


def measure_critical_value(
    mechanism: Union[Mechanism, str, MechanismRunner],
    family: AlternativeFamily,
    i: int,
    search_range: Optional[Tuple[int, int]] = None,
) -> Optional[Fraction]:
    """
    Threshold bid v with i winning above v and losing below it.

    Bisection brackets v between two adjacent micro-units; breakpoints of
    the win region are rationals with denominator at most the largest trip
    size, so one more bisection over those candidates pins v exactly.
    Returns NEVER_WINS when i loses at the top of the range.
    """
    run = _runner(mechanism)
    lo, hi = search_range or default_search_range(family, i)
    cache = {}

    def wins(bid) -> bool:
        if bid not in cache:
            cache[bid] = i in run(family.with_bid(i, bid)).winner.members
        return cache[bid]

    # Check the top of the range first
    if not wins(hi):
        logger.debug(f"Passenger {i} never wins below {hi}")
        return NEVER_WINS
    top = hi
    if wins(lo):
        _check_monotone(wins, i, lo, lo, top)
        return Fraction(lo)

    # Integer bisection down to one micro-unit
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if wins(mid):
            hi = mid
        else:
            lo = mid
    _check_monotone(wins, i, lo, hi, top)

    # Candidate thresholds inside [lo, hi]
    max_den = max(1, _max_pool_size(family))
    candidates = sorted({lo + Fraction(a, d) for d in range(1, max_den + 1) for a in range(0, d + 1)})
    # first gap whose midpoint wins; the threshold is its left end
    gaps = [(candidates[k] + candidates[k + 1]) / 2 for k in range(len(candidates) - 1)]
    first, last = 0, len(gaps)
    while first < last:
        mid = (first + last) // 2
        if wins(gaps[mid]):
            last = mid
        else:
            first = mid + 1
    if first == len(gaps):
        return Fraction(hi)
    return candidates[first]


def _check_monotone(wins, i: int, lose_at, win_at, top) -> None:
    """Winning must persist above the bracket and never occur below it"""
    step = max(1, top // PROBES)
    for probe in range(0, top + 1, step):
        if probe < lose_at and wins(probe):
            raise NonMonotoneError(f"passenger {i} wins at {probe} but loses at {lose_at}")
        if probe > win_at and not wins(probe):
            raise NonMonotoneError(f"passenger {i} loses at {probe} but wins at {win_at}")
