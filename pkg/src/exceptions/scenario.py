class BaseScenarioError(Exception):
    """Base class for scenario loading errors."""

    def __init__(self, message=None):
        if message is None:
            message = "A scenario error occurred."
        super().__init__(message)


class ScenarioParseError(BaseScenarioError):
    """Raised when a scenario file cannot be read, parsed or validated."""

    def __init__(self, message="Scenario file could not be parsed."):
        super().__init__(message)


class BudgetAuditFailedError(BaseScenarioError):
    """Raised when the scenario's assumption budget does not hold on its sample grid."""

    def __init__(self, message="Assumption budget audit failed."):
        super().__init__(message)
