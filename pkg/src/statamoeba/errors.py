"""Exception types raised across the package."""


class StatAmoebaError(Exception):
    """Base class for all package errors."""


class InvalidModel(StatAmoebaError, ValueError):
    pass


class ModelTooLarge(StatAmoebaError, ValueError):
    pass


class InvalidStratum(StatAmoebaError, ValueError):
    pass


class InvalidSubset(StatAmoebaError, ValueError):
    pass


class EmptyTermSet(StatAmoebaError, ValueError):
    pass


class RangeExceeded(StatAmoebaError, OverflowError):
    """Direct summation would overflow; use the log-gap form instead."""


class DimensionUnsupported(StatAmoebaError, ValueError):
    pass


class OnBoundary(StatAmoebaError, ValueError):
    """A sign vector has a zero entry (the point lies on a locus)."""


class NotLabeled(StatAmoebaError, ValueError):
    pass


class LinearOnly(StatAmoebaError, ValueError):
    pass


class InvalidLambda(StatAmoebaError, ValueError):
    pass


class Lopsided(StatAmoebaError, ValueError):
    def __init__(self, index: int):
        super().__init__(f"length list is lopsided at position {index}")
        self.index = index


class Inconclusive(StatAmoebaError, RuntimeError):
    pass
