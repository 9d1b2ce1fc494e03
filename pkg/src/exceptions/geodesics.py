class BaseGeodesicError(Exception):
    """Base class for errors raised while tracing rays and frames."""

    def __init__(self, message=None):
        if message is None:
            message = "A geodesic integration error occurred."
        super().__init__(message)


class AtlasExitError(BaseGeodesicError):
    """Raised when a ray leaves the atlas before the requested affine parameter."""

    def __init__(self, s_exit: float, message=None):
        self.s_exit = s_exit
        if message is None:
            message = f"Ray left the atlas at s = {s_exit:.6g}."
        super().__init__(message)


class StepUnderflowError(BaseGeodesicError):
    """Raised when the step-size controller stalls."""

    def __init__(self, message="Integrator step size underflow (possible metric singularity)."):
        super().__init__(message)


class LevelOutOfRangeError(BaseGeodesicError):
    """Raised when a time level lies outside the t-range covered by a ray."""

    def __init__(self, message="Requested t-level lies outside the ray's range."):
        super().__init__(message)


class FrameDegeneracyError(BaseGeodesicError):
    """Raised when a null frame cannot be completed."""

    def __init__(self, message="Null frame construction is degenerate."):
        super().__init__(message)


class FrameDriftError(BaseGeodesicError):
    """Raised when the transported frame loses orthonormality beyond tolerance."""

    def __init__(self, message="Transported frame drifted beyond tolerance."):
        super().__init__(message)


class NonTimelikeTError(BaseGeodesicError):
    """Raised when the normal reconstructed from the null frame is not unit timelike."""

    def __init__(self, message="Reconstructed T fails g(T, T) = -1."):
        super().__init__(message)
