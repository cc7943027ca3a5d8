"""Command-line entry point: ``python -m src <command> ...``"""

import argparse
import sys
from typing import List, Optional

from src.commands import baseline, fit_wind, gen_wind, solve, sweep
from src.constants import DEFAULT_CRUISE_LEVEL_HPA, DEFAULT_RBF_RIDGE, EXIT_INPUT_ERROR
from src.utils.log import configure_logging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='formation-planner',
                                     description='Formation flight mission planning by embedded optimal control')
    parser.add_argument('--verbose', action='store_true', help='log at DEBUG level')
    parser.add_argument('--threads', type=int, default=None, help='cap on parallel baseline solves')
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('fit-wind', help='fit an RBF wind model to a grid CSV')
    p.add_argument('grid')
    p.add_argument('out')
    p.add_argument('--shape', type=float, default=None)
    p.add_argument('--ridge', type=float, default=DEFAULT_RBF_RIDGE)
    p.add_argument('--stride', type=int, default=1, help='use every n-th grid point as a center')
    p.add_argument('--pressure-level', type=float, default=DEFAULT_CRUISE_LEVEL_HPA)
    p.set_defaults(handler=fit_wind.handler)

    p = commands.add_parser('gen-wind', help='write a synthetic jet-stream wind grid')
    p.add_argument('out')
    for name in gen_wind.SYNTHESIS_OPTIONS:
        kind = int if name == 'seed' else float
        p.add_argument(f'--{name.replace("_", "-")}', dest=name, type=kind, default=None)
    p.set_defaults(handler=gen_wind.handler)

    p = commands.add_parser('solve', help='solve the formation mission of a run config')
    p.add_argument('config')
    p.add_argument('--compare', action='store_true', help='also solve the solo baselines and compare')
    p.set_defaults(handler=solve.handler)

    p = commands.add_parser('baseline', help='solve every flight of a run config alone')
    p.add_argument('config')
    p.set_defaults(handler=baseline.handler)

    p = commands.add_parser('sweep', help='re-solve over departure delays or fuel savings')
    p.add_argument('kind', choices=['delays', 'savings'])
    p.add_argument('config')
    p.add_argument('--values', type=float, nargs='+', required=True,
                   help='delays in minutes or fuel savings as fractions')
    p.add_argument('--flights', nargs='+', default=None, help='flights to delay (default: trailing aircraft)')
    p.set_defaults(handler=sweep.handler)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(verbose=args.verbose)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.threads is not None and args.threads < 1:
        print(f'--threads must be at least 1, got {args.threads}', file=sys.stderr)
        return EXIT_INPUT_ERROR
    return args.handler(args)


if __name__ == '__main__':
    sys.exit(main())
