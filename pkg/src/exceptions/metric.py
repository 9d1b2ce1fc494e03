class BaseMetricError(Exception):
    """Base class for all metric-related errors."""

    def __init__(self, message=None):
        if message is None:
            message = "A metric evaluation error occurred."
        super().__init__(message)


class PointOutsideAtlasError(BaseMetricError):
    """Raised when a spacetime point lies in no chart of the atlas."""

    def __init__(self, message="Point lies outside every chart of the atlas."):
        super().__init__(message)


class DegenerateMetricError(BaseMetricError):
    """Raised when the spatial metric fails positive-definiteness or the lapse is not positive."""

    def __init__(self, message="Spatial metric is not positive definite."):
        super().__init__(message)


class RankUnsupportedError(BaseMetricError):
    """Raised when a tensor norm is requested for a rank above four."""

    def __init__(self, message="Tensor rank above 4 is not supported."):
        super().__init__(message)


class UnknownMetricFamilyError(BaseMetricError):
    """Raised when a scenario names a metric family that is not registered."""

    def __init__(self, message="Unknown metric family."):
        super().__init__(message)
