from exceptions.metric import (
    BaseMetricError,
    PointOutsideAtlasError,
    DegenerateMetricError,
    RankUnsupportedError,
    UnknownMetricFamilyError,
)
from exceptions.geodesics import (
    BaseGeodesicError,
    AtlasExitError,
    StepUnderflowError,
    LevelOutOfRangeError,
    FrameDegeneracyError,
    FrameDriftError,
    NonTimelikeTError,
)
from exceptions.analysis import (
    BaseAnalysisError,
    ResolutionTooCoarseError,
    AssumptionCViolatedError,
    DeltaBeyondInjectivityError,
    UnboundedDomainError,
    BallExitsChartError,
)
from exceptions.scenario import BaseScenarioError, ScenarioParseError, BudgetAuditFailedError
from exceptions.storage import BaseReportStorageError, ReportWriteError
