"""Exception hierarchy.

Every failure the estimators can report has its own class so that callers
(the curve evaluator, the Monte Carlo harness, the CLI) can record it by
name instead of parsing messages.
"""


class LogDensError(Exception):
    """Base class for all package errors."""

    code = "error"


class ConfigurationError(LogDensError, ValueError):
    code = "config_error"


class EmptyWindow(LogDensError):
    code = "empty_window"


class SingularSystem(LogDensError):
    code = "singular"


class MethodUnsupported(LogDensError):
    code = "method_unsupported"


class ZeroDensity(LogDensError):
    code = "zero_density"


class ZeroSurvivor(LogDensError):
    code = "zero_survivor"


class ZeroCurvature(LogDensError):
    code = "zero_curvature"


class RankDeficient(LogDensError):
    code = "rank_deficient"


class NoConvergence(LogDensError):
    code = "no_convergence"

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class OutOfSupport(LogDensError, ValueError):
    code = "out_of_support"
