"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SGQError(Exception):
    """Base class. ``witness`` carries an optional counterexample."""

    def __init__(self, message: str = "", witness=None):
        super().__init__(message)
        self.witness = witness


class DuplicateGenerator(SGQError):
    pass


class NonTerminatingRelation(SGQError):
    pass


class OddInvertibleGenerator(SGQError):
    pass


class AlgebraMismatch(SGQError):
    pass


class IllDefinedOnQuotient(SGQError):
    pass


class NotInvertible(SGQError):
    pass


class Inhomogeneous(SGQError):
    pass


class NotSquareZero(SGQError):
    pass


class WindowTooSmall(SGQError):
    pass


class NotChainMap(SGQError):
    pass


class NonZeroComposite(SGQError):
    pass


class AlphaNotClosed(SGQError):
    pass


class UnsupportedGroup(SGQError):
    pass


class RelationalBaseUnsupported(SGQError):
    pass


class NotTwoForm(SGQError):
    pass


class TrivializationInvalid(SGQError):
    pass


class OddShift(SGQError):
    pass


class UnsupportedShift(SGQError):
    pass


class NotSemidensity(SGQError):
    pass


class NotUnit(SGQError):
    pass


class CertificateInvalid(SGQError):
    pass


class RouteFlagMismatch(SGQError):
    pass


class JacobiFails(SGQError):
    pass


class PairingNotInvariant(SGQError):
    pass


class NotStabilizer(SGQError):
    pass


class DimensionMismatch(SGQError):
    pass


class NotNilpotent(SGQError):
    pass


class NoRationalTriple(SGQError):
    pass


class GradingNotIntegral(SGQError):
    pass


class PairingDegenerateOnGm1(SGQError):
    pass


class ActionNotLie(SGQError):
    pass


class UnknownScenario(SGQError):
    pass


class BadParameter(SGQError):
    pass
