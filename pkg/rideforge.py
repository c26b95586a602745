"""
RideForge command line: worked example, instance generation, experiment
runs, verification sweeps and parameter grids.
"""
import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from experiments.demo import run_worked_example
from experiments.generator import generate_batch
from experiments.runner import VARIANTS, report_to_frame, run_instances, sweep, write_report_csv
from models.errors import MechanismError
from models.instance import load_instance, save_instance
from models.schemas import CostPolicy, GeneratorConfig
from oracle.suites import SUITES, format_summary, run_suite
from phases.auctions import outcome_to_document

logger = logging.getLogger("rideforge")


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(',') if x.strip()]


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(',') if x.strip()]


def _variant_list(text: str) -> List[str]:
    return [x.strip() for x in text.split(',') if x.strip()]


# ==================== SUBCOMMANDS ====================

def cmd_demo(args) -> int:
    started = time.perf_counter()
    try:
        _, outcomes = run_worked_example()
    except MechanismError as e:
        logger.error(str(e))
        return 1
    logger.info(f"Worked example in {(time.perf_counter() - started) * 1000:.2f} ms")
    if args.json:
        docs = {name: json.loads(outcome_to_document(o).json()) for name, o in outcomes.items()}
        Path(args.json).write_text(json.dumps(docs, indent=2, sort_keys=True) + '\n', encoding='utf-8')
        logger.info(f"Wrote {args.json}")
    return 0


def cmd_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = GeneratorConfig(
        n=args.n, sigma=args.sigma, seed=args.seed,
        capacity=args.capacity, bid_floor=CostPolicy(args.bid_floor),
    )
    for k, inst in enumerate(generate_batch(config, args.count)):
        path = save_instance(inst, out / f"instance_{k:04d}.json")
        logger.debug(f"Wrote {path}")
    logger.info(f"Wrote {args.count} instances to {out}")
    return 0


def cmd_run(args) -> int:
    files = sorted(Path(args.input).glob('*.json'))
    if not files:
        print(f"Error: no instance files in {args.input}")
        return 1
    instances = [load_instance(f) for f in files]
    report = run_instances(instances, _variant_list(args.variants), args.workers)
    frame = report_to_frame(report, args.timings)
    write_report_csv(frame, args.out)
    print(frame.to_string(index=False))
    logger.info(
        f"Wrote {args.out}: {report.instance_count} instances, "
        f"{report.excluded_zero_welfare} excluded, {len(report.failures)} failed"
    )
    if report.floor_bid_share is not None:
        logger.info(f"{float(report.floor_bid_share):.1%} of bids have zero upper-bound surplus")
    return 0


def cmd_verify(args) -> int:
    summary = run_suite(args.suite, args.seed, args.samples, args.workers)
    for line in format_summary(summary):
        print(line)
    if args.summary:
        Path(args.summary).write_text(summary.json(indent=2) + '\n', encoding='utf-8')
    return 0 if summary.passed else 2


def cmd_sweep(args) -> int:
    frame = sweep(_int_list(args.n_list), _float_list(args.sigma_list), args.count, args.seed,
                  _variant_list(args.variants), args.workers, args.timings)
    write_report_csv(frame, args.out)
    logger.info(f"Wrote {args.out} with {len(frame)} rows")
    return 0


# ==================== MAIN ====================

def build_parser() -> argparse.ArgumentParser:
    workers = int(os.getenv('RIDEFORGE_WORKERS', '1'))
    all_variants = ','.join(VARIANTS)

    parser = argparse.ArgumentParser(description="Budget-balanced strategy-proof ridesharing auctions")
    sub = parser.add_subparsers(dest='command', required=True)

    demo = sub.add_parser('demo', help="Four-passenger worked example")
    demo.add_argument('--json', help="Write the three outcomes as JSON to this path")
    demo.set_defaults(func=cmd_demo)

    gen = sub.add_parser('gen', help="Generate instance files")
    gen.add_argument('--n', type=int, required=True, help="Passengers per instance")
    gen.add_argument('--sigma', type=float, default=3.0, help="Half-gaussian bid scale")
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--count', type=int, default=1)
    gen.add_argument('--capacity', type=int, default=3)
    gen.add_argument('--bid-floor', default=CostPolicy.UPPER_BOUND.value,
                     choices=[p.value for p in CostPolicy])
    gen.add_argument('--out', required=True, help="Output directory")
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser('run', help="Run auction variants over instance files")
    run.add_argument('--in', dest='input', required=True, help="Directory of instance files")
    run.add_argument('--variants', default=all_variants)
    run.add_argument('--out', default='report.csv')
    run.add_argument('--workers', type=int, default=workers)
    run.add_argument('--timings', action='store_true', help="Include wall time rows in the CSV")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser('verify', help="Property sweeps; exits non-zero on any violation")
    verify.add_argument('--suite', choices=SUITES, default='all')
    verify.add_argument('--seed', type=int, default=0)
    verify.add_argument('--samples', type=int, default=500)
    verify.add_argument('--workers', type=int, default=workers)
    verify.add_argument('--summary', help="Write the JSON summary to this path")
    verify.set_defaults(func=cmd_verify)

    grid = sub.add_parser('sweep', help="Experiment grid over n and sigma")
    grid.add_argument('--n-list', default='10,25')
    grid.add_argument('--sigma-list', default='3,5')
    grid.add_argument('--count', type=int, default=100)
    grid.add_argument('--seed', type=int, default=0)
    grid.add_argument('--variants', default=all_variants)
    grid.add_argument('--workers', type=int, default=workers)
    grid.add_argument('--timings', action='store_true')
    grid.add_argument('--out', default='sweep.csv')
    grid.set_defaults(func=cmd_sweep)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(
        level=os.getenv('RIDEFORGE_LOG_LEVEL', 'INFO').upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as e:
        print(f"Error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
