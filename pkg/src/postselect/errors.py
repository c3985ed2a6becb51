"""Exception hierarchy.

Validation errors mean the caller handed in something malformed; computation
errors mean the inputs were fine but the requested object does not exist
(for example an optimal measurement when the supports differ).
"""


class PostselectError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PostselectError, ValueError):
    """Input failed a type or precondition check."""


class ComputationError(PostselectError, ArithmeticError):
    """A well-formed request that has no finite / constructible answer."""


class NonHermitian(ValidationError):
    pass


class NotPsd(ValidationError):
    pass


class DimMismatch(ValidationError):
    pass


class ZeroOperator(ValidationError):
    pass


class BadEpsilon(ValidationError):
    pass


class BadPrior(ValidationError):
    pass


class BadGamma(ValidationError):
    pass


class InvalidKraus(ValidationError):
    pass


class InvalidPovm(ValidationError):
    pass


class InfeasiblePovm(ValidationError):
    pass


class ConeMismatch(ValidationError):
    pass


class UnsupportedVariant(ValidationError):
    pass


class DimOverflow(ComputationError):
    pass


class InfiniteOmega(ComputationError):
    pass


class InfiniteXi(ComputationError):
    pass


class NoConclusiveMass(ComputationError):
    pass
