"""Exception types raised by the numerical engine."""


class IsodtError(ValueError):
    """Base class for all engine errors."""


class SingularQuaternionError(IsodtError):
    pass


class SingularMatrixError(IsodtError):
    pass


class GridError(IsodtError):
    """Grid too small, shape mismatch, or a violated grid invariant."""


class NonConformalError(IsodtError):
    pass


class NotClosedError(IsodtError):
    """A 1-form that should be closed has large circulation."""


class NotParallelError(IsodtError):
    """A section fails the parallelism check for its connection."""


class DegenerateError(IsodtError):
    """Degenerate configuration: coincident points, vanishing projections, ..."""
