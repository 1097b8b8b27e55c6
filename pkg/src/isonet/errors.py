"""Exception hierarchy shared by all modules."""


class IsonetError(Exception):
    """Base class for every error raised by this package."""


class DomainError(IsonetError, ValueError):
    """An argument lies outside the region where a formula is defined."""


class NonConvergence(IsonetError, ArithmeticError):
    """Adaptive quadrature exhausted its budget above the requested tolerance."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class TailConditionError(IsonetError, ValueError):
    """The shape function decays too slowly for the requested quantity."""


class InfeasibleError(IsonetError, ValueError):
    """Noise alone violates the outage budget, so no positive density exists."""


class FlatObjectiveError(IsonetError, ValueError):
    """The objective is numerically constant over the search range."""


class ScenarioError(IsonetError, ValueError):
    """A scenario file or dictionary could not be parsed or is invalid."""
