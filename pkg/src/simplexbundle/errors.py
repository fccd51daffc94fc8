"""Exception hierarchy shared by every module of the package."""


class SimplexError(Exception):
    """Base class for all errors raised by simplexbundle."""


class NegativeWeight(SimplexError, ValueError):
    pass


class NotNormalized(SimplexError, ValueError):
    pass


class BaseMismatch(SimplexError, ValueError):
    pass


class EmptySubset(SimplexError, ValueError):
    pass


class OutOfDomain(SimplexError, ValueError):
    pass


class AbsoluteContinuityViolation(SimplexError, ArithmeticError):
    """A zero cell carries a nonzero velocity, so no score exists there."""


class SupportNotNested(SimplexError, ValueError):
    pass


class SupportMismatch(SimplexError, ValueError):
    pass


class GradientUnavailable(SimplexError, ArithmeticError):
    pass


class StepRejected(SimplexError, RuntimeError):
    pass


class UnsupportedIndeterminate(SimplexError, ValueError):
    pass


class EqualExponents(SimplexError, ValueError):
    pass


class RankDeficientBasis(SimplexError, ValueError):
    pass


class BoundaryPoint(SimplexError, ValueError):
    """A curve point sits on the boundary where a binomial relation is not guaranteed."""


class BetaZero(SimplexError, ValueError):
    pass


class ModelNotFound(SimplexError, LookupError):
    pass
