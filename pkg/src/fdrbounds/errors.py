"""Exception types shared across the package.

DataError subclasses signal malformed or unusable inputs (CLI exit code 3).
InfeasibleError subclasses signal computations with no defined answer for
the given inputs, e.g. a share-based bound with zero discoveries (exit 4).
"""


class FdrBoundsError(Exception):
    """Base class for all package errors."""


class DataError(FdrBoundsError):
    """Input data is malformed or unusable."""


class DuplicateKeyError(DataError):
    """A (predictor, month) pair appears more than once in a panel file."""


class NoParsableRowsError(DataError):
    """A panel file contained no usable observations."""


class EmptySampleError(DataError):
    """An operation that needs at least one t-statistic got an empty sample."""


class DimensionMismatchError(DataError):
    """Arrays that must align have incompatible shapes."""


class InfeasibleError(FdrBoundsError):
    """The requested computation has no defined answer for these inputs."""


class NoDiscoveriesError(InfeasibleError):
    """No t-statistic clears the hurdle, so a share-based bound is undefined."""


class InfeasibleExtrapolationError(InfeasibleError):
    """The mean published t-stat does not exceed the hurdle, so the implied
    exponential mean would be non-positive and no extrapolation exists."""
