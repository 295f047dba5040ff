"""Exception hierarchy shared by every module."""


class RicciDynamoError(Exception):
    """Base class for all errors raised by the package."""


class InvalidInput(RicciDynamoError, ValueError):
    """Input violates a precondition (non-finite data, zero vector, bad shape)."""


class NumericalBlowup(RicciDynamoError, FloatingPointError):
    """An integrator produced a non-finite state."""

    def __init__(self, time, message=None):
        self.time = float(time)
        super().__init__(message or f"non-finite state at t={self.time:.6g}")


class SingularMetric(RicciDynamoError):
    """Metric is singular or not positive-definite at a queried point."""

    def __init__(self, point, message=None):
        self.point = point
        super().__init__(message or f"singular metric at {point}")


class FlowSingularity(RicciDynamoError):
    """Ricci flow degenerates the metric at a finite time."""

    def __init__(self, critical_time, message=None):
        self.critical_time = float(critical_time)
        super().__init__(message or f"flow singularity at t={self.critical_time:.6g}")


class NotEinstein(RicciDynamoError):
    """An Einstein-space formula was requested on a non-Einstein metric."""


class InconsistentFrame(RicciDynamoError):
    """Rigid-rotation induction form used with a frame that does not co-rotate."""
