"""Exception types raised across the package."""

from __future__ import annotations


class CasmonError(Exception):
    """Base class for all package errors."""


class NotCartan(CasmonError):
    pass


class RankTooLarge(CasmonError):
    pass


class RelationViolation(CasmonError):
    pass


class MixedAlgebras(CasmonError):
    pass


class ZeroBracket(CasmonError):
    pass


class LegMismatch(CasmonError):
    pass


class Disconnected(CasmonError):
    pass


class BasisDegenerate(CasmonError):
    pass


class NotAdapted(CasmonError):
    pass


class PoleTooClose(CasmonError):
    pass


class ToleranceNotMet(CasmonError):
    pass


class Resonant(CasmonError):
    pass


class RadiusExceeded(CasmonError):
    pass


class NoSolution(CasmonError):
    pass


class DivergentTail(CasmonError):
    pass


class InvalidCase(CasmonError):
    pass


class ResonantWeight(CasmonError):
    pass


class UnsupportedN(CasmonError):
    pass


class ChartSingular(CasmonError):
    pass


class PathHitsWall(CasmonError):
    pass


class InsideDisk(CasmonError):
    pass


class RouteDisagreement(CasmonError):
    pass


class ConfigInvalid(CasmonError):
    pass
