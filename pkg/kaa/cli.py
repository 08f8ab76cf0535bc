"""
Argument parsing for the kaa command line; one subcommand per invocation
"""
import argparse

import numpy as np

from kaa.routes import kepler_routes, sim_routes, verify_routes

ROUTES = (kepler_routes, sim_routes, verify_routes)


def parse_vector(text: str) -> np.ndarray:
    """'1,0,0' -> array([1., 0., 0.])"""
    parts = [p for p in text.replace(' ', '').split(',') if p]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    try:
        values = np.array([float(p) for p in parts])
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number in {text!r}")
    if not np.all(np.isfinite(values)):
        raise argparse.ArgumentTypeError(f"non-finite component in {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='kaa',
        description='Asymptotic action-angle coordinates of the repulsive Kepler problem '
                    'and a mean-field gas simulator around a point charge')
    parser.add_argument('--log-level', dest='log_level', type=str.upper,
                        choices=('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'), help='override LOG_LEVEL')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True
    for route in ROUTES:
        route.register(subparsers, parse_vector)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    """Parse and check the vectors each command needs; exits with status 2 on bad input"""
    parser = build_parser()
    args = parser.parse_args(argv)
    required = getattr(args, 'required_vectors', None)
    if required is not None:
        missing = [name for name in required(args) if getattr(args, name, None) is None]
        if missing:
            parser.error(f"{args.command} needs {', '.join('--' + m for m in missing)}")
    return args
