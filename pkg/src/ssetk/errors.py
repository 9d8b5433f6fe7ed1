"""Exception hierarchy; each class carries the CLI exit code for its stage."""


class SsetkError(Exception):
    exit_code = 9


class InputError(SsetkError):
    """Missing or malformed input file."""

    exit_code = 1


class ParameterError(SsetkError, ValueError):
    exit_code = 2


class GraphError(SsetkError, ValueError):
    """Graph invariant violated (regularity, edge count, vertex range)."""

    exit_code = 3


class GenerationError(SsetkError):
    exit_code = 3


class BudgetError(SsetkError):
    """Exact enumeration requested beyond the configured budget."""

    exit_code = 3


class DistributionError(SsetkError, ValueError):
    exit_code = 4


class SamplingError(SsetkError):
    exit_code = 4


class SolverError(SsetkError):
    exit_code = 5


class ProjectionError(SsetkError):
    exit_code = 6


class ResolutionError(SsetkError):
    """Sphere triangulation would exceed the subdivision cap."""

    exit_code = 7


class ConditioningError(SsetkError):
    exit_code = 8

    def __init__(self, message, rejection_rate=None):
        super().__init__(message)
        self.rejection_rate = rejection_rate


class SpectralError(SsetkError):
    """Eigensolver non-convergence or degenerate sweep input."""

    exit_code = 9
