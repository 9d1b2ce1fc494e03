class BaseReportStorageError(Exception):
    """Base class for all report storage errors."""

    def __init__(self, message=None):
        if message is None:
            message = "A report storage error occurred."
        super().__init__(message)


class ReportWriteError(BaseReportStorageError):
    """Raised when an artifact cannot be written to the output directory."""

    def __init__(self, message="Failed to write report artifact."):
        super().__init__(message)
