#!/usr/bin/env python3
"""
kaa command-line entry point
Parses one command, dispatches it to its route and logs the outcome
"""

import sys
import time

from kaa.cli import parse_args
from kaa.config import settings
from kaa.utils.logger import get_logger, log_command, set_console_level

logger = get_logger('kaa.cli')


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as e:
        # argparse reports usage errors with status 2 and --help with 0
        return e.code if isinstance(e.code, int) else 2

    if args.log_level:
        settings.update(log_level=args.log_level)
        set_console_level(args.log_level)

    start_time = time.time()
    exit_code = args.handler(args)
    duration_ms = (time.time() - start_time) * 1000
    log_command(logger, args.command, exit_code, duration_ms)
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
