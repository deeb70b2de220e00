"""Exception hierarchy shared by the library and the command line.

Every error carries the process exit code the CLI reports for it.
"""


class ChannelError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str) -> None:
        super().__init__(detail)
        self.detail = detail


class InvalidInputError(ChannelError, ValueError):
    """Shape mismatch, non-symmetric or non-positive matrices, invalid covariances."""

    exit_code = 2


class SingularCovarianceError(InvalidInputError):
    """A fitted sample covariance is singular (too few or degenerate samples)."""


class InfeasibleEnergyError(ChannelError):
    exit_code = 3

    def __init__(self, detail: str, *, e_min: float) -> None:
        super().__init__(detail)
        self.e_min = e_min


class ThresholdViolationError(ChannelError):
    exit_code = 4

    def __init__(self, detail: str, *, bound: float | None = None) -> None:
        super().__init__(detail)
        self.bound = bound


class OptimizerConvergenceError(ChannelError):
    exit_code = 5

    def __init__(self, detail: str, *, iterations: int) -> None:
        super().__init__(detail)
        self.iterations = iterations
