"""Exception types shared across the package."""


class BendersError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(BendersError, ValueError):
    pass


class NumericalBreakdown(BendersError):
    pass


class StaleBasis(BendersError):
    pass


class InvalidConfig(BendersError, ValueError):
    pass


class SizeLimit(BendersError):
    pass


class IterationLimit(BendersError):
    pass


class NodeLimit(BendersError):
    pass


class TimeLimit(BendersError):
    pass


class InvalidRay(BendersError, ValueError):
    pass


class EmptyPool(BendersError):
    pass


class EmptyArchive(BendersError):
    pass


class UnknownId(BendersError, KeyError):
    pass


class ThresholdViolation(BendersError, ValueError):
    pass


class FormatError(BendersError, ValueError):
    """Raised when a serialized instance, pool or archive block is malformed."""
