"""Exception hierarchy shared by every module."""


class BearingSearchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(BearingSearchError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateGeometry(BearingSearchError, ValueError):
    """Coincident points or a zero-length direction vector."""


class IllConditionedInit(BearingSearchError):
    """The two-bearing initialisation has no usable unique intersection."""


class NearTerminalRange(BearingSearchError):
    """The normalized objective is undefined because rho is (numerically) 1."""


class ControllerFault(BearingSearchError):
    """A controller step could not produce a decision.

    When raised out of :func:`bearing_search.simulator.run`, ``trace`` holds
    the records produced before the fault.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
