"""Exception hierarchy shared by all modules."""


class CubipercError(Exception):
    pass


class DomainError(CubipercError, ValueError):
    """A parameter lies outside its admissible range (e.g. p not in [0, 1])."""


class SizeError(CubipercError, ValueError):
    """Grid extents are non-positive or the cell count is too large."""


class GeometryError(CubipercError, ValueError):
    """Boxes, windows and grids do not fit together."""


class CapabilityError(CubipercError, NotImplementedError):
    """The requested combination of dimension and mode is not supported."""


class CapacityError(CubipercError, ValueError):
    """A construction does not fit in the requested box."""

    def __init__(self, message, max_feasible=None):
        super().__init__(message)
        self.max_feasible = max_feasible


class UndefinedMeasureError(CubipercError, ValueError):
    """The empirical measure has no components to normalize by."""


class FitError(CubipercError, ValueError):
    """A tail-decay fit could not be carried out on the given data."""


class ConsistencyError(CubipercError, AssertionError):
    """An internal invariant failed; indicates a bug rather than bad input."""
