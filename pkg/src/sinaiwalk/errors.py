"""Exception types raised by the contract checks of this package."""


class SinaiWalkError(ValueError):
    """Base class for all contract violations."""


class NotRecurrentError(SinaiWalkError):
    """The environment law has a nonzero mean log-odds, so the walk is transient."""


class DegenerateError(SinaiWalkError):
    """The environment law has zero variance of the log-odds."""


class OutOfRangeError(SinaiWalkError):
    """A transition probability lies outside the open interval (0, 1)."""


class NoSolutionError(SinaiWalkError):
    """No mixing weight can balance the requested two-point law."""


class DegenerateSupportError(SinaiWalkError):
    """A valley formula requires a strictly positive decay ratio."""


class DivergentTotalError(SinaiWalkError):
    """The unnormalized weights do not sum to a finite positive total."""


class TooLargeError(SinaiWalkError):
    """Exhaustive path enumeration was requested beyond the supported size."""


class EmptyWalkError(SinaiWalkError):
    """A statistic that divides by the step count was asked of a zero-step walk."""


class BadBetaError(SinaiWalkError):
    """A mass fraction outside [0, 1] was supplied."""


class BadDeltaError(SinaiWalkError):
    """A non-positive occupation threshold was supplied."""


class BadExtremesError(SinaiWalkError):
    """Support extremes do not satisfy 0 <= lower < 1/2 < upper <= 1."""


class NoValleyError(SinaiWalkError):
    """No flat-bottom valley length satisfies the requested threshold."""


class UnknownStatisticError(SinaiWalkError):
    """The requested statistic is not present in the aggregate result."""
