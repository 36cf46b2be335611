"""Exception hierarchy shared by all modules."""


class TkMergeError(Exception):
    """Base class for all errors raised by the package."""


class InputError(TkMergeError, ValueError):
    """Malformed input data or arguments."""


class NonFiniteData(InputError):
    pass


class LengthMismatch(InputError):
    pass


class AlphaOutOfRange(InputError):
    pass


class KTooLarge(InputError):
    pass


class KGreaterThank(InputError):
    """The target number of groups exceeds the number of fitted components."""


class KOutOfRange(InputError):
    pass


class TooFewValues(InputError):
    pass


class EmptyVector(InputError):
    pass


class GridTooShort(InputError):
    pass


class SeparationInfeasible(InputError):
    pass


class FitError(TkMergeError, RuntimeError):
    """An algorithm could not produce a valid solution."""


class DegenerateCluster(FitError):
    pass


class SingularCovariance(FitError):
    pass


class AllZeroEigenvalues(FitError):
    pass


class NonPsdCovariance(FitError):
    pass


class AllLevelsFailed(FitError):
    pass


class InvariantViolation(AssertionError):
    """Raised by strict-mode runtime checks (see :mod:`tkmerge.checks`)."""
