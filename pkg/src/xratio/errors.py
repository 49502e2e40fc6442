"""Exception hierarchy.

Every error carries one of three categories used by the command line:
input problems, geometric degeneracies, and failed verifications.
"""


class XrError(Exception):
    """Base class for all errors raised by the package."""

    category = "input"


class DegeneracyError(XrError):
    """Inputs are valid but in a degenerate (non-generic) position."""

    category = "degeneracy"


class VerificationError(XrError):
    """A numerical verification or audit came out negative."""

    category = "verification"


# matnum
class NotSymmetric(XrError):
    pass


class DependentColumns(XrError):
    pass


class NotSpd(XrError):
    pass


class SingularMatrix(XrError):
    pass


# cartan
class NotDecreasing(XrError):
    pass


class BadMultiplicities(XrError):
    pass


class DimensionMismatch(XrError):
    pass


class SingularGram(XrError):
    pass


# flags
class SignatureMismatch(XrError):
    pass


class NotUnimodular(XrError):
    pass


class NotOpposite(DegeneracyError):
    pass


# spdspace
class TypeMismatch(XrError):
    pass


class NonOpposite(DegeneracyError):
    pass


class CalibrationFailed(VerificationError):
    pass


# crossratio
class Inadmissible(DegeneracyError):
    pass


class NotRegular(DegeneracyError):
    pass


class NotGeneric(DegeneracyError):
    pass


class BasepointNotInFlat(DegeneracyError):
    pass


# rank1
class CoincidentPoints(DegeneracyError):
    pass


class Degenerate(DegeneracyError):
    pass


class SameEnd(DegeneracyError):
    pass


class NotMoebius(VerificationError):
    def __init__(self, message, max_deviation=None):
        super().__init__(message)
        self.max_deviation = max_deviation


class NotExtendable(VerificationError):
    pass


# products
class ArityMismatch(XrError):
    pass


class Ambiguous(VerificationError):
    pass


class Inconsistent(VerificationError):
    pass


# moebius
class CannotSeparate(DegeneracyError):
    pass
