"""Exception hierarchy shared by all modules."""


class VbaIsacError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(VbaIsacError, ValueError):
    """An argument violates a documented precondition."""


class DimensionError(InvalidInputError):
    """Matrix shapes do not agree."""


class RankDeficientError(VbaIsacError):
    """A matrix does not have the rank an operation needs."""


class DegenerateError(VbaIsacError):
    """A quantity is too close to zero to normalise or divide by."""


class SolverError(VbaIsacError):
    """An iterative solver failed to produce a usable answer."""
