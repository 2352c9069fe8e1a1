"""Exception hierarchy shared by every module of the package."""


class BlackHoleCloningError(Exception):
    """Base class for all errors raised by :mod:`bhclone`."""


class DomainError(BlackHoleCloningError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class NonPositiveFrequencyRatio(DomainError):
    """omega/T must be strictly positive (T -> infinity diverges)."""


class TruncationError(BlackHoleCloningError):
    """A truncated Fock computation lost more probability than allowed."""


class ResourceError(BlackHoleCloningError):
    """The occupation cutoff needed for a tolerance exceeds the ceiling."""


class NumericalError(BlackHoleCloningError):
    """A numerical routine failed or two routes disagreed."""


class EmptyPostselection(BlackHoleCloningError):
    """The post-selected outcome has (numerically) zero probability."""

    def __init__(self, M, probability):
        self.M = M
        self.probability = probability
        super().__init__(f"post-selection on M={M} has probability {probability:.3g}")
