"""Exception hierarchy shared by every module of the package."""


class RaiddError(Exception):
    """Base class for all errors raised by :mod:`raidd`."""


class DimensionMismatch(RaiddError, ValueError):
    pass


class NonFiniteInput(RaiddError, ValueError):
    pass


class NotHurwitz(RaiddError):
    pass


class UnstableSystem(RaiddError):
    pass


class NoStabilizingSolution(RaiddError):
    pass


class SingularSubspace(RaiddError):
    pass


class EigenFailure(RaiddError):
    pass


class BisectionStall(RaiddError):
    pass


class PoleOnAxis(RaiddError):
    pass


class FactorizationFailed(RaiddError):
    """A plant does not admit a normalized coprime factorization."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotDetectable(FactorizationFailed):
    pass


class NotStabilizable(FactorizationFailed):
    pass


class OriginCrossing(RaiddError):
    pass


class GridResolutionExceeded(RaiddError):
    pass


class NotConnected(RaiddError):
    pass


class TooLarge(RaiddError, ValueError):
    pass


class SingularL(RaiddError):
    pass


class MarginShortfall(RaiddError):
    pass


class AlgebraicLoop(RaiddError):
    pass


class EventGraphMismatch(RaiddError):
    pass


class ConfigError(RaiddError):
    """Configuration failed schema validation; ``location`` is a JSON path."""

    def __init__(self, message, location="$"):
        super().__init__(f"{location}: {message}")
        self.location = location
