"""Exception hierarchy used across framekit."""


class FramekitError(Exception):
    """Base class for all framekit errors."""


class InvalidInput(FramekitError, ValueError):
    """Raised when inputs violate a documented precondition."""


class NumericalFailure(FramekitError, ArithmeticError):
    """Raised when an eigensolver or other numerical routine fails."""


class BudgetExceeded(FramekitError):
    """Raised when an exhaustive search would exceed its candidate budget."""


class CertificateFailure(FramekitError):
    """Raised when an independently recomputed certificate disagrees."""


class InsufficientDensity(FramekitError):
    """Raised when a packed region holds fewer points than a cell needs."""


class NoProgress(FramekitError):
    """Raised when a thinning pass cannot remove anything."""


class PartialResult(FramekitError):
    """Raised when thinning stops at max_iterations above the target density.

    The partial output is attached as ``result`` (a dict with ``Gamma`` and
    ``trace``) so callers can still inspect or persist it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
