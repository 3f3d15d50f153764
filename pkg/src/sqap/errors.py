"""Exception hierarchy shared by every module."""


class SqapError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(SqapError, ValueError):
    pass


class NotPowerOfTwo(SqapError, ValueError):
    pass


class NonFiniteInput(SqapError, ValueError):
    pass


class GranularityMismatch(SqapError, ValueError):
    pass


class LengthMismatch(SqapError, ValueError):
    pass


class ProjectionError(SqapError, ValueError):
    """A world point could not be mapped onto the token grid."""


class BehindCamera(ProjectionError):
    pass


class OutOfFrame(ProjectionError):
    pass


class KTooLarge(SqapError, ValueError):
    pass


class MTooLarge(SqapError, ValueError):
    pass


class BudgetTooSmall(SqapError, ValueError):
    pass


class InvalidSpec(SqapError, ValueError):
    pass


class ConfigError(SqapError, ValueError):
    pass
