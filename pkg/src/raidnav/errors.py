"""Exception hierarchy shared by the navigation and control modules."""


class RaidNavError(Exception):
    """Base class for all package errors."""


class ConfigError(RaidNavError):
    """Run configuration failed to parse or validate."""


# geometry / odometry
class IndexOutOfNeighborhood(RaidNavError, IndexError):
    pass


class DegeneratePoint(RaidNavError, ValueError):
    pass


class EmptyScan(RaidNavError, ValueError):
    pass


class NoKeyframes(RaidNavError, ValueError):
    pass


class DegenerateLine(RaidNavError, ValueError):
    pass


class DegeneratePlane(RaidNavError, ValueError):
    pass


class InsufficientCorrespondences(RaidNavError):
    pass


class NonConvergence(RaidNavError):
    """Gauss-Newton ran out of iterations; ``result`` holds the best estimate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


# path following
class PathExhausted(RaidNavError):
    pass


# control / harness
class FunnelBreach(RaidNavError):
    """Tracking error reached the performance funnel boundary."""


class EmptyRecord(RaidNavError, ValueError):
    pass


class DegenerateFit(RaidNavError, ValueError):
    pass


class BreachInTrace(RaidNavError, ValueError):
    pass
