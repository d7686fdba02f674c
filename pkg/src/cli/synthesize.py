"""
`synthesize`: write a seeded synthetic bar CSV
"""

import argparse
from pathlib import Path

import structlog

from cli.common import OutputSet
from core.enums import SyntheticKind
from integrations.market_data import synthesize, write_csv

logger = structlog.get_logger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("synthesize", help="write a synthetic bar CSV")
    parser.add_argument("--kind", required=True, choices=[k.value for k in SyntheticKind])
    parser.add_argument("--n", type=int, default=253, help="number of bars")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise", type=float, default=5.0, help="close noise in points")
    parser.add_argument("--start", type=float, default=2000.0, help="first price")
    parser.add_argument("--slope", type=float, default=1.0, help="trend points per bar")
    parser.add_argument("--band", type=float, default=50.0, help="range half-width in points")
    parser.add_argument("--out", type=Path, required=True, help="CSV file to write")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, outputs: OutputSet) -> int:
    series = synthesize(
        args.kind,
        n=args.n,
        seed=args.seed,
        noise=args.noise,
        start=args.start,
        slope=args.slope,
        band=args.band,
    )
    target = args.out
    target.parent.mkdir(parents=True, exist_ok=True)
    outputs.written.append(target)
    write_csv(series, target)
    logger.info("synthetic series written", kind=args.kind, bars=len(series), path=str(target))
    return 0
