"""
Batch experiments: run the auction variants over many instances, normalize
by the VCG welfare of each instance and aggregate into a report.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from models.schemas import CostPolicy, GeneratorConfig, Instance, Mechanism
from phases.alternatives import AlternativeFamily, assign_costs, build_family
from phases.auctions import MECHANISMS, Metrics, run_vcg
from utils.rationals import format_rational, format_sqrt

from .generator import derive_seed, generate_instance

logger = logging.getLogger(__name__)

VARIANTS: Dict[str, Tuple[Mechanism, CostPolicy]] = {
    "VCG": (Mechanism.VCG, CostPolicy.ZERO),
    "WMS-Zero": (Mechanism.WMS, CostPolicy.ZERO),
    "VCGs-Direct": (Mechanism.VCGS, CostPolicy.DIRECT),
    "WMS-Direct": (Mechanism.WMS, CostPolicy.DIRECT),
    "VCGs-UB": (Mechanism.VCGS, CostPolicy.UPPER_BOUND),
    "WMS-UB": (Mechanism.WMS, CostPolicy.UPPER_BOUND),
}

NORMALIZED = ("profit", "welfare", "surplus_welfare", "surplus_profit")
METRICS = NORMALIZED + ("passengers",)
TIME_METRIC = "time_ms"


# ==================== RESULTS ====================

@dataclass(frozen=True)
class InstanceResult:
    index: int
    seed: Optional[int]
    normalizer: Fraction = Fraction(0)
    metrics: Dict[str, Metrics] = field(default_factory=dict)
    times_ms: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None
    # passengers whose bid sits exactly on their upper-bound cost
    floor_bids: int = 0
    bid_count: int = 0


@dataclass(frozen=True)
class ReportRow:
    variant: str
    metric: str
    mean: Union[Fraction, float]
    variance: Union[Fraction, float]
    count: int

    @property
    def std_text(self) -> str:
        if isinstance(self.variance, Fraction):
            return format_sqrt(self.variance)
        return f"{self.variance ** 0.5:.3f}"

    @property
    def mean_text(self) -> str:
        if isinstance(self.mean, Fraction):
            return format_rational(self.mean)
        return f"{self.mean:.3f}"


@dataclass(frozen=True)
class ExperimentReport:
    rows: Tuple[ReportRow, ...]
    instance_count: int
    excluded_zero_welfare: int = 0
    failures: Tuple[str, ...] = ()
    floor_bids: int = 0
    bid_count: int = 0

    @property
    def floor_bid_share(self) -> Optional[Fraction]:
        """Share of bids with zero surplus under the upper-bound policy"""
        return Fraction(self.floor_bids, self.bid_count) if self.bid_count else None

    def row(self, variant: str, metric: str) -> Optional[ReportRow]:
        for r in self.rows:
            if r.variant == variant and r.metric == metric:
                return r
        return None


# ==================== EVALUATION ====================

def evaluate_instance(inst: Instance, variants: Sequence[str], index: int = 0,
                      seed: Optional[int] = None) -> InstanceResult:
    """Run each variant once on its cost policy's family"""
    families: Dict[CostPolicy, AlternativeFamily] = {}
    routes = {}

    def family_for(policy: CostPolicy) -> AlternativeFamily:
        if policy not in families:
            families[policy] = build_family(inst, policy, route_cache=routes)
            logger.debug(f"Instance {index}: {len(families[policy].alternatives)} trips under {policy.value}")
        return families[policy]

    normalizer = run_vcg(family_for(CostPolicy.ZERO)).metrics.welfare
    upper = assign_costs(inst, CostPolicy.UPPER_BOUND)
    floor_bids = sum(1 for i, b in inst.bids().items() if b == upper[i])
    metrics, times_ms = {}, {}
    for name in variants:
        mechanism, policy = VARIANTS[name]
        family = family_for(policy)
        started = time.perf_counter()
        outcome = MECHANISMS[mechanism](family)
        times_ms[name] = (time.perf_counter() - started) * 1000.0
        metrics[name] = outcome.metrics
    return InstanceResult(index, seed, normalizer, metrics, times_ms, floor_bids=floor_bids, bid_count=inst.n)


def _config_task(args: Tuple[int, GeneratorConfig, Tuple[str, ...]]) -> InstanceResult:
    index, config, variants = args
    try:
        return evaluate_instance(generate_instance(config), variants, index, config.seed)
    except Exception as e:
        return InstanceResult(index, config.seed, error=f"{type(e).__name__}: {e}")


def _instance_task(args: Tuple[int, Instance, Tuple[str, ...]]) -> InstanceResult:
    index, inst, variants = args
    try:
        return evaluate_instance(inst, variants, index)
    except Exception as e:
        return InstanceResult(index, None, error=f"{type(e).__name__}: {e}")


def _map(task, items: List, workers: int) -> List[InstanceResult]:
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(task, items, chunksize=max(1, len(items) // (4 * workers))))
    return [task(item) for item in items]


def _check_variants(variants: Sequence[str]) -> Tuple[str, ...]:
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        raise ValueError(f"unknown variants {unknown}; expected a subset of {list(VARIANTS)}")
    return tuple(variants)


def run_experiment(configs: Sequence[GeneratorConfig], variants: Sequence[str] = tuple(VARIANTS),
                   workers: int = 1) -> ExperimentReport:
    """One instance per config; results merge in config order whatever the worker count"""
    variants = _check_variants(variants)
    if not variants:
        return ExperimentReport(rows=(), instance_count=0)
    results = _map(_config_task, [(k, c, variants) for k, c in enumerate(configs)], workers)
    return aggregate(results, variants)


def run_instances(instances: Sequence[Instance], variants: Sequence[str] = tuple(VARIANTS),
                  workers: int = 1) -> ExperimentReport:
    variants = _check_variants(variants)
    if not variants:
        return ExperimentReport(rows=(), instance_count=0)
    results = _map(_instance_task, [(k, inst, variants) for k, inst in enumerate(instances)], workers)
    return aggregate(results, variants)


def batch_configs(config: GeneratorConfig, count: int) -> List[GeneratorConfig]:
    return [config.copy(update={'seed': derive_seed(config.seed, k)}) for k in range(count)]


# ==================== AGGREGATION ====================

def _mean_var(values: List) -> Tuple:
    count = len(values)
    mean = sum(values, type(values[0])(0)) / count
    variance = sum(((v - mean) ** 2 for v in values), type(values[0])(0)) / count
    return mean, variance


def aggregate(results: Sequence[InstanceResult], variants: Sequence[str]) -> ExperimentReport:
    """Mean and population variance of every metric over the usable instances"""
    failures = []
    usable = []
    excluded = 0
    for r in results:
        if r.error is not None:
            logger.error(f"Instance {r.index} (seed {r.seed}) failed: {r.error}")
            failures.append(f"instance {r.index}: {r.error}")
        elif r.normalizer == 0:
            excluded += 1
            logger.warning(f"Instance {r.index} excluded: VCG welfare is 0")
        else:
            usable.append(r)

    rows = []
    if usable:
        for name in variants:
            for metric in METRICS:
                values = []
                for r in usable:
                    value = Fraction(getattr(r.metrics[name], metric))
                    values.append(value / r.normalizer if metric in NORMALIZED else value)
                mean, variance = _mean_var(values)
                rows.append(ReportRow(name, metric, mean, variance, len(values)))
            mean, variance = _mean_var([r.times_ms[name] for r in usable])
            rows.append(ReportRow(name, TIME_METRIC, mean, variance, len(usable)))

    return ExperimentReport(
        rows=tuple(rows),
        instance_count=len(usable),
        excluded_zero_welfare=excluded,
        failures=tuple(failures),
        floor_bids=sum(r.floor_bids for r in usable),
        bid_count=sum(r.bid_count for r in usable),
    )


def report_to_frame(report: ExperimentReport, include_timings: bool = False) -> pd.DataFrame:
    """Rows as strings, exact where possible; timings only on request"""
    records = [
        {
            'variant': r.variant,
            'metric': r.metric,
            'mean': r.mean_text,
            'std': r.std_text,
            'count': r.count,
        }
        for r in report.rows
        if include_timings or r.metric != TIME_METRIC
    ]
    return pd.DataFrame.from_records(records, columns=['variant', 'metric', 'mean', 'std', 'count'])


def write_report_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator='\n')
    return path


def _log_trend(n: int, sigma: float, report: ExperimentReport) -> None:
    share = report.floor_bid_share
    if share is None:
        return
    trend = []
    for name in ("VCGs-UB", "WMS-UB"):
        row = report.row(name, "welfare")
        if row is not None:
            trend.append(f"{name} welfare {float(row.mean):.3f}")
    logger.info(
        f"Sweep n={n} sigma={sigma}: {float(share):.1%} of bids have zero upper-bound surplus"
        + (f"; {', '.join(trend)}" if trend else "")
    )


def sweep(n_list: Sequence[int], sigma_list: Sequence[float], count: int, seed: int = 0,
          variants: Sequence[str] = tuple(VARIANTS), workers: int = 1,
          include_timings: bool = False, base: Optional[GeneratorConfig] = None) -> pd.DataFrame:
    """Reports over an n x sigma grid stacked into one frame with n and sigma columns"""
    frames = []
    for n in n_list:
        for sigma in sigma_list:
            fields = dict(base.dict()) if base is not None else {}
            fields.update(n=n, sigma=sigma, seed=seed)
            config = GeneratorConfig(**fields)
            report = run_experiment(batch_configs(config, count), variants, workers)
            logger.info(
                f"Sweep n={n} sigma={sigma}: {report.instance_count} instances, "
                f"{report.excluded_zero_welfare} excluded, {len(report.failures)} failed"
            )
            _log_trend(n, sigma, report)
            frame = report_to_frame(report, include_timings)
            frame.insert(0, 'sigma', sigma)
            frame.insert(0, 'n', n)
            frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=['n', 'sigma', 'variant', 'metric', 'mean', 'std', 'count'])
    return pd.concat(frames, ignore_index=True)
