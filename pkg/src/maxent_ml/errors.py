"""Exception hierarchy shared by every module of the package."""


class MaxEntError(Exception):
    """Base class for all errors raised by maxent_ml."""


class InvalidInput(MaxEntError, ValueError):
    pass


class DimensionMismatch(MaxEntError, ValueError):
    pass


class SupportMismatch(MaxEntError, ValueError):
    """A positive frequency sits on an outcome the model gives zero mass."""


class InfeasibleTarget(MaxEntError):
    """The target moment cannot be matched by any strictly positive pmf."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegeneratePotential(MaxEntError):
    pass


class MaxIterExceeded(MaxEntError):
    """Raised when a solver runs out of iterations.

    ``best`` holds the last iterate as a non-converged ``DualSolution``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EnumerationTooLarge(MaxEntError):
    pass


class NoCoherentType(MaxEntError):
    pass


class NoFeasiblePoint(MaxEntError):
    pass


class InvalidRange(MaxEntError, ValueError):
    pass
