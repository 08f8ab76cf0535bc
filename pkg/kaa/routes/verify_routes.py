"""
Verification command: runs property suites and reports SuiteReport JSON
"""
from kaa.exceptions import ConfigError
from kaa.services.verify import SUITES, run_suites
from kaa.utils.metrics_collector import RunMetrics
from kaa.utils.response_helpers import handle_service_error, success_response

EXIT_SUITE_FAILED = 1


@handle_service_error
def verify(args):
    """Exit 0 iff every requested suite passes"""
    if args.samples is not None and args.samples < 0:
        raise ConfigError("--samples must be non-negative", samples=args.samples)
    reports = run_suites(args.suite, seed=args.seed, samples=args.samples, threads=args.threads)
    if args.metrics:
        metrics = RunMetrics()
        for report in reports:
            metrics.record_suite(report.suite, report.max_residual, report.passed)
        metrics.write(args.metrics)

    passed = all(r.passed for r in reports)
    payload = reports[0].to_dict() if len(reports) == 1 else {
        'suites': [r.to_dict() for r in reports],
        'pass': passed,
    }
    return success_response(payload, exit_code=0 if passed else EXIT_SUITE_FAILED)


def register(subparsers, vector):
    """Attach the verify command to the CLI"""
    parser = subparsers.add_parser('verify', help='Run property suites')
    parser.add_argument('--suite', default='all', help=f"one of {', '.join(sorted(SUITES))} or all")
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--samples', type=int, help='sample count (suite default when omitted)')
    parser.add_argument('--threads', type=int, help='concurrent suites (KAA_THREADS when omitted)')
    parser.add_argument('--metrics', help='write suite metrics to this textfile')
    parser.set_defaults(handler=verify)
