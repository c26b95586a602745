"""
Verification sweeps behind `rideforge.py verify`

Each suite draws seeded instances or families, runs the checks and
returns a VerifySummary with per-property counts, replayable failures and
the tightest margins seen.
"""
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from experiments.generator import derive_seed, generate_instance
from models.schemas import CostPolicy, GeneratorConfig, Mechanism, VerifySummary
from phases.alternatives import build_family, is_downward_closed
from phases.auctions import MECHANISMS, run_vcg, run_vcgs, run_wms, vcgs_critical_value
from utils.rationals import format_rational, harmonic

from .bounds import (
    check_budget_balance,
    check_profit_bound,
    check_ums_vs_wms,
    check_welfare_ratio,
    disjoint_winner_family,
    random_downward_closed_family,
    non_closed_family,
    tightness_family,
    vcg_loss_family,
)
from .critical import measure_critical_value
from .strategyproof import SWEEP_COMBOS, TripDependentCostHarness, check_instance_strategyproofness

logger = logging.getLogger(__name__)

SUITES = ("strategyproof", "bounds", "critical", "all")

MIN_PASSENGERS = 3
MAX_PASSENGERS = 6


@dataclass
class Tally:
    checks: Counter = field(default_factory=Counter)
    violations: Counter = field(default_factory=Counter)
    failures: List[str] = field(default_factory=list)
    margins: Dict[str, Fraction] = field(default_factory=dict)
    a_prime_mismatches: List[str] = field(default_factory=list)

    def record(self, prop: str, ok: bool, detail: str = "") -> None:
        self.checks[prop] += 1
        if not ok:
            self.violations[prop] += 1
            self.failures.append(f"{prop}: {detail}")

    def margin(self, prop: str, value: Fraction) -> None:
        if prop not in self.margins or value < self.margins[prop]:
            self.margins[prop] = value

    def merge(self, other: "Tally") -> None:
        self.checks.update(other.checks)
        self.violations.update(other.violations)
        self.failures.extend(other.failures)
        self.a_prime_mismatches.extend(other.a_prime_mismatches)
        for prop, value in other.margins.items():
            self.margin(prop, value)


def sample_instance(seed: int, index: int):
    """The index-th sweep instance: n cycles through 3..6, capacity 3"""
    n = MIN_PASSENGERS + index % (MAX_PASSENGERS - MIN_PASSENGERS + 1)
    instance_seed = derive_seed(seed, index)
    return instance_seed, generate_instance(GeneratorConfig(n=n, seed=instance_seed, capacity=3))


# ==================== INSTANCE CHECKS ====================

def _instance_task(args: Tuple[str, int, int]) -> Tally:
    suite, seed, index = args
    instance_seed, inst = sample_instance(seed, index)
    tally = Tally()
    routes = {}
    families = {p: build_family(inst, p, prune_unaffordable=False, route_cache=routes) for p in CostPolicy}

    # A'_i definitions compared at truthful bids only
    for policy, family in families.items():
        outcome = MECHANISMS[Mechanism.WMS](family)
        for i in outcome.a_prime_mismatches():
            d = outcome.diagnostics[i]
            tally.a_prime_mismatches.append(
                f"seed={instance_seed} wms/{policy.value} passenger {i}: "
                f"general {len(d.a_prime)}, simple {d.a_prime_simple_size}"
            )

    if suite in ("critical", "all"):
        for mechanism, policy in SWEEP_COMBOS:
            family = families[policy]
            outcome = MECHANISMS[mechanism](family)
            for i in outcome.winner.members:
                measured = measure_critical_value(mechanism, family, i)
                price = outcome.prices[i]
                tally.record("critical_value", measured == price,
                             f"seed={instance_seed} {mechanism.value}/{policy.value} passenger {i}: "
                             f"measured {measured}, price {price}")
                if mechanism == Mechanism.VCGS:
                    closed = vcgs_critical_value(family, i)
                    tally.record("vcgs_closed_form", closed == price,
                                 f"seed={instance_seed} {policy.value} passenger {i}: {closed} vs {price}")

    if suite in ("strategyproof", "all"):
        violations = check_instance_strategyproofness(inst, seed=instance_seed)
        tally.checks["strategyproof"] += 1
        if violations:
            tally.violations["strategyproof"] += len(violations)
            tally.failures.extend(f"strategyproof: {v}" for v in violations)

    if suite in ("bounds", "all"):
        for mechanism, policy in SWEEP_COMBOS:
            family = families[policy]
            outcome = MECHANISMS[mechanism](family)
            for i in outcome.winner.members:
                tally.record("individual_rationality", outcome.prices[i] <= family.bids[i],
                             f"seed={instance_seed} {mechanism.value}/{policy.value} passenger {i}")
            if mechanism != Mechanism.VCG and policy != CostPolicy.ZERO:
                tally.record("budget_balance", check_budget_balance(outcome, family, chain=True),
                             f"seed={instance_seed} {mechanism.value}/{policy.value}")
                metrics = outcome.metrics
                tally.record("surplus_lower_bounds",
                             metrics.surplus_profit <= metrics.profit
                             and metrics.surplus_welfare <= metrics.welfare,
                             f"seed={instance_seed} {mechanism.value}/{policy.value}")
    return tally


def _run_instances(suite: str, seed: int, samples: int, workers: int) -> Tally:
    tasks = [(suite, seed, index) for index in range(samples)]
    tally = Tally()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_instance_task, tasks, chunksize=max(1, samples // (4 * workers))))
    else:
        results = [_instance_task(t) for t in tasks]
    for result in results:
        tally.merge(result)
    return tally


# ==================== FAMILY CHECKS ====================

def _family_checks(seed: int, samples: int, tally: Tally) -> Dict[str, str]:
    info = {}
    rng = np.random.default_rng(seed)
    for index in range(samples):
        family = random_downward_closed_family(rng, max_passengers=5, max_size=4)
        k = max(1, family.max_size)
        wms = run_wms(family)
        tally.a_prime_mismatches.extend(
            f"family {index} of seed {seed} passenger {i}" for i in wms.a_prime_mismatches())
        ratio = check_welfare_ratio(wms, family)
        if ratio is not None:
            tally.record("wms_welfare_ratio", ratio <= harmonic(k),
                         f"family {index} of seed {seed}: ratio {ratio} > H_{k}")
            tally.margin("wms_welfare_ratio", harmonic(k) - ratio)
        report = check_profit_bound(wms, family)
        if report.winner_bound_applies:
            tally.record("profit_bound_winner", report.winner_bound_holds,
                         f"family {index} of seed {seed}: margin {report.winner_bound_margin}")
            tally.margin("profit_bound_winner", report.winner_bound_margin)
        if report.family_bound_applies:
            tally.record("profit_bound_family", report.family_bound_holds,
                         f"family {index} of seed {seed}: margin {report.family_bound_margin}")
            tally.margin("profit_bound_family", report.family_bound_margin)
        vcgs = run_vcgs(family)
        vcgs_ratio = check_welfare_ratio(vcgs, family)
        tally.record("vcgs_optimal", vcgs_ratio in (None, 1), f"family {index} of seed {seed}: {vcgs_ratio}")

    for k in range(1, 5):
        family = tightness_family(k, 12)
        ratio = check_welfare_ratio(run_wms(family), family)
        tally.record("tightness", ratio == harmonic(k), f"k={k}: ratio {ratio}, expected {harmonic(k)}")
        tally.record("tightness_downward_closed", is_downward_closed(family).closed, f"k={k}")

    for n in (10, 100, 1000):
        family = non_closed_family(n)
        ratio = check_welfare_ratio(run_wms(family), family)
        tally.record("non_closed_ratio", ratio == Fraction(n + 1, 3), f"n={n}: ratio {ratio}")

    pairs = 0
    for index in range(max(1, samples // 5)):
        report = check_ums_vs_wms(disjoint_winner_family(rng))
        if report.hypotheses_met:
            pairs += 1
            tally.record("ums_vs_wms", report.holds,
                         f"family {index} of seed {seed}: {report.wms_surplus_payment} < {report.ums_surplus_payment}")
            tally.margin("ums_vs_wms", report.wms_surplus_payment - report.ums_surplus_payment)
    info["ums_vs_wms_families"] = str(pairs)

    harness = TripDependentCostHarness.standard()
    found = harness.find_violations()
    tally.record("trip_dependent_negative_control", bool(found), "no profitable deviation found")
    info["trip_dependent_violations"] = str(len(found))

    loss = vcg_loss_family()
    outcome = run_vcg(loss)
    info["vcg_loss_example"] = (
        f"prices {format_rational(outcome.total_price)} vs cost {outcome.winner.cost}, "
        f"budget balanced: {check_budget_balance(outcome, loss)}"
    )
    return info


# ==================== ENTRY POINT ====================

def run_suite(suite: str, seed: int = 0, samples: int = 500, workers: int = 1) -> VerifySummary:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}, expected one of {', '.join(SUITES)}")
    logger.info(f"Running {suite} suite: seed={seed} samples={samples} workers={workers}")
    tally = _run_instances(suite, seed, samples, workers)

    info: Dict[str, str] = {}
    if suite == "strategyproof":
        found = TripDependentCostHarness.standard().find_violations()
        tally.record("trip_dependent_negative_control", bool(found), "no profitable deviation found")
        info["trip_dependent_violations"] = str(len(found))
    if suite in ("bounds", "all"):
        info.update(_family_checks(seed, samples * 2, tally))

    info["a_prime_definition_mismatches"] = str(len(tally.a_prime_mismatches))
    if tally.a_prime_mismatches:
        info["a_prime_mismatch_cases"] = "; ".join(tally.a_prime_mismatches)
        logger.warning(f"{len(tally.a_prime_mismatches)} A'_i definition mismatches at truthful bids")

    summary = VerifySummary(
        suite=suite,
        seed=seed,
        samples=samples,
        checks=dict(sorted(tally.checks.items())),
        violations={k: tally.violations.get(k, 0) for k in sorted(tally.checks)},
        failures=tally.failures,
        margins={k: format_rational(v) for k, v in sorted(tally.margins.items())},
        informational=info,
    )
    logger.info(f"Suite {suite} finished: {sum(summary.violations.values())} violations")
    return summary


def format_summary(summary: VerifySummary, max_failures: int = 20) -> List[str]:
    """Line-oriented report"""
    lines = [f"suite={summary.suite} seed={summary.seed} samples={summary.samples}"]
    for prop, count in summary.checks.items():
        bad = summary.violations.get(prop, 0)
        status = "ok" if bad == 0 else "FAIL"
        lines.append(f"{status:4} {prop}: {count} checks, {bad} violations")
    for prop, margin in summary.margins.items():
        lines.append(f"margin {prop}: {margin}")
    for key, value in summary.informational.items():
        lines.append(f"info {key}: {value}")
    for failure in summary.failures[:max_failures]:
        lines.append(f"  {failure}")
    if len(summary.failures) > max_failures:
        lines.append(f"  ... {len(summary.failures) - max_failures} more")
    lines.append("PASS" if summary.passed else "FAIL")
    return lines
