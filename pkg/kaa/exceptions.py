"""Exception hierarchy shared by services, routes and the CLI.

Every error carries the process exit code the CLI reports for it.
"""


class KaaError(ValueError):
    """Base class for all package errors"""

    exit_code = 2

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self):
        return {
            'error': type(self).__name__,
            'message': self.message,
            'exit_code': self.exit_code,
            **{k: v for k, v in self.context.items() if v is not None},
        }


class ConfigError(KaaError):
    """Invalid or incomplete configuration / command-line input"""
    exit_code = 2


class UnknownSuiteError(ConfigError):
    exit_code = 2


class DomainError(KaaError):
    """Input outside the domain of a transform (|x| = 0, rho < 1, ...)"""
    exit_code = 3


class BranchError(DomainError):
    """(eta, iota) pair on the wrong side of the fold"""
    exit_code = 3


class StepUnderflowError(DomainError):
    exit_code = 3


class SamplerSupportError(DomainError):
    exit_code = 3


class SimulationError(KaaError):
    """Failure after a run has started"""
    exit_code = 4


class SingularityError(SimulationError):
    exit_code = 4


class OracleError(SimulationError):
    exit_code = 4


class WindowTooShortError(SimulationError):
    exit_code = 4


class IllConditionedWindowError(SimulationError):
    exit_code = 4
