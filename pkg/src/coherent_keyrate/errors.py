"""Exception types raised across the package.

Every error derives from :class:`KeyRateError` (itself a ``ValueError``) so
callers can catch the whole family at once.
"""


class KeyRateError(ValueError):
    """Base class for all package errors."""


class NotHermitian(KeyRateError):
    pass


class TraceNotOne(KeyRateError):
    pass


class NotPositive(KeyRateError):
    pass


class NotUnitary(KeyRateError):
    pass


class NoConvergence(KeyRateError):
    pass


class DimensionMismatch(KeyRateError):
    pass


class InvalidDistribution(KeyRateError):
    pass


class OutOfRange(KeyRateError):
    pass


class BadIndex(KeyRateError):
    pass


class InconsistentStatistics(KeyRateError):
    """Measured statistics are not compatible with any quantum state."""


class InconsistentErrorRates(InconsistentStatistics):
    pass


class Infeasible(InconsistentStatistics):
    pass


class InfeasibleAlpha(InconsistentStatistics):
    pass


class VanishingNorm(KeyRateError):
    pass


class TooLarge(KeyRateError):
    pass


class EmptyData(KeyRateError):
    pass


class StateFileError(KeyRateError):
    """A state or hashing-matrix file could not be parsed."""
