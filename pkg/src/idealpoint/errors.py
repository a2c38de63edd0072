"""Exception types shared across the package.

The CLI maps these onto exit codes: validation -> 1, numerical -> 2,
I/O (plain OSError) -> 3.
"""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class NumericalError(ArithmeticError):
    """Raised when a computation degenerates numerically.

    May carry a ``last_iterate`` attribute with the most recent state of an
    iterative solver, for post-mortem inspection.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
