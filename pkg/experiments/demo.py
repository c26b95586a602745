"""
Four-passenger worked example: four trips R, G, B, Y over passengers 1-4
"""
import logging
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

from models.errors import MechanismError
from phases.alternatives import AlternativeFamily, make_abstract_family
from phases.auctions import AuctionOutcome, run_ums, run_vcgs, run_wms
from utils.rationals import format_rational

logger = logging.getLogger(__name__)

EXAMPLE_COSTS: Dict[int, int] = {1: 4, 2: 4, 3: 4, 4: 6}
EXAMPLE_BIDS: Dict[int, int] = {1: 14, 2: 12, 3: 8, 4: 10}
EXAMPLE_TRIPS: Dict[str, Tuple[Tuple[int, ...], int]] = {
    "R": ((1, 2), 5),
    "G": ((1, 3, 4), 7),
    "B": ((1,), 3),
    "Y": ((2,), 3),
}

EXPECTED_WM = {"R": 16, "G": 12, "B": 10, "Y": 8}
EXPECTED_WINNER = "R"
EXPECTED_PRICES = {1: Fraction(20, 3), 2: Fraction(10)}


def example_family() -> AlternativeFamily:
    spec = [
        (members, {i: EXAMPLE_BIDS[i] - EXAMPLE_COSTS[i] for i in members}, cost)
        for members, cost in EXAMPLE_TRIPS.values()
    ]
    return make_abstract_family(spec, EXAMPLE_COSTS)


def _trip_name(outcome: AuctionOutcome) -> str:
    for name, (members, _) in EXAMPLE_TRIPS.items():
        if members == outcome.winner.members:
            return name
    return "-"


def _describe(outcome: AuctionOutcome) -> List[str]:
    lines = [f"{outcome.mechanism.value.upper()} winner: {_trip_name(outcome)} {list(outcome.winner.members)}"]
    for i in outcome.winner.members:
        lines.append(f"  p_{i} = {format_rational(outcome.prices[i])}")
    lines.append(f"  surplus profit = {format_rational(outcome.metrics.surplus_profit)}")
    return lines


def run_worked_example(echo: Callable[[str], None] = print) -> Tuple[List[str], Dict[str, AuctionOutcome]]:
    """
    Walk through the example, printing each step.

    Raises MechanismError if WMS disagrees with the expected weighted
    minimum surpluses, winner or prices.
    """
    family = example_family()
    transcript: List[str] = []

    def say(line: str) -> None:
        transcript.append(line)
        echo(line)

    say("passenger  bid  cost  surplus")
    for i in sorted(EXAMPLE_BIDS):
        say(f"{i:>9}  {EXAMPLE_BIDS[i]:>3}  {EXAMPLE_COSTS[i]:>4}  {EXAMPLE_BIDS[i] - EXAMPLE_COSTS[i]:>7}")
    say("trip  members    cost  s_min  wm")
    wm = {}
    for name, (members, cost) in EXAMPLE_TRIPS.items():
        alt = family.find(members)
        wm[name] = alt.wm
        say(f"{name:>4}  {str(list(members)):<9}  {cost:>4}  {alt.s_min:>5}  {alt.wm:>2}")

    outcomes = {"wms": run_wms(family), "ums": run_ums(family), "vcgs": run_vcgs(family)}
    wms = outcomes["wms"]
    for line in _describe(wms):
        say(line)
    for i, d in sorted(wms.diagnostics.items()):
        say(f"  wm*_{i} = {d.wm_star}, A'_{i} = {list(d.a_prime)}")
    for key in ("ums", "vcgs"):
        for line in _describe(outcomes[key]):
            say(line)

    prices = {i: wms.prices[i] for i in wms.winner.members}
    if wm != EXPECTED_WM or _trip_name(wms) != EXPECTED_WINNER or prices != EXPECTED_PRICES:
        raise MechanismError(
            f"worked example mismatch: wm={wm}, winner={_trip_name(wms)}, prices={prices}"
        )
    logger.info("Worked example reproduced")
    return transcript, outcomes
