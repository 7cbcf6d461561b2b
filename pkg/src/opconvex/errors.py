"""Exception hierarchy shared by all modules."""


class OpConvexError(Exception):
    """Base class for every error raised by this package."""


class DomainViolation(OpConvexError, ValueError):
    """An argument lies outside the domain of a function or map."""


class DimensionMismatch(OpConvexError, ValueError):
    pass


class ArityMismatch(OpConvexError, ValueError):
    pass


class NotHermitian(OpConvexError, ValueError):
    pass


class NonConvergence(OpConvexError, ArithmeticError):
    """The eigensolver failed to converge."""


class NotCommuting(OpConvexError, ValueError):
    pass


class SingularDifferential(OpConvexError, ArithmeticError):
    """A Loewner matrix entry is too small to divide by."""


class NoIntegralForm(OpConvexError, ValueError):
    pass


class BadParameter(OpConvexError, ValueError):
    pass


class UnknownMap(OpConvexError, KeyError):
    pass


class UnknownCheck(OpConvexError, KeyError):
    pass
