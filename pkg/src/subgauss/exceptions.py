"""Exception hierarchy for subgauss."""

from __future__ import annotations


class SubGaussError(ValueError):
    """Base class for every error raised by this package."""


class InvalidDistribution(SubGaussError):
    """A distribution could not be constructed from the given data."""


class LengthMismatch(InvalidDistribution):
    pass


class NonPositiveMass(InvalidDistribution):
    pass


class MassSumOutOfTolerance(InvalidDistribution):
    pass


class UOutOfRange(InvalidDistribution):
    """The odds parameter u of a centered two-point law must satisfy u >= 1."""


class ZeroX1(InvalidDistribution):
    pass


class NonPositiveK(SubGaussError):
    pass


class NonPositiveTol(SubGaussError):
    pass


class UnsupportedLaw(SubGaussError):
    pass


class DegenerateLaw(SubGaussError):
    pass


class NotInMomentSet(SubGaussError):
    """The law violates E exp(X^2) <= 2."""


class KTooSmall(SubGaussError):
    pass


class PreconditionNotMet(SubGaussError):
    pass


class ParseError(SubGaussError):
    """A distribution spec string could not be parsed.

    ``position`` is the zero-based character offset where parsing failed.
    """

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class FileError(SubGaussError):
    pass


class InvalidAtoms(InvalidDistribution):
    """Support points are non-finite or not pairwise distinct."""
