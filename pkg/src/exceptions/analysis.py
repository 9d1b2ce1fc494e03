class BaseAnalysisError(Exception):
    """Base class for errors raised by cone and slice analyses."""

    def __init__(self, message=None):
        if message is None:
            message = "An analysis error occurred."
        super().__init__(message)


class ResolutionTooCoarseError(BaseAnalysisError):
    """Raised when no requested level can be resolved by the direction grid."""

    def __init__(self, message="Direction grid is too coarse to resolve intersections."):
        super().__init__(message)


class AssumptionCViolatedError(BaseAnalysisError):
    """Raised when the audited closeness to flat exceeds the declared epsilon."""

    def __init__(self, message="Audited closeness to the flat metric exceeds the declared epsilon."):
        super().__init__(message)


class DeltaBeyondInjectivityError(BaseAnalysisError):
    """Raised when a flux depth reaches the estimated injectivity radius."""

    def __init__(self, message="Flux depth is not below the injectivity radius estimate."):
        super().__init__(message)


class UnboundedDomainError(BaseAnalysisError):
    """Raised when a slice integral is requested on an infinite chart without a cutoff box."""

    def __init__(self, message="Slice integrals on unbounded charts need a cutoff box."):
        super().__init__(message)


class BallExitsChartError(BaseAnalysisError):
    """Raised when a geodesic ball leaves a non-periodic chart."""

    def __init__(self, message="Geodesic ball leaves the chart."):
        super().__init__(message)
