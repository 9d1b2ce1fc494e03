from schemas.scenarios import (
    DerivativeProviderSchema,
    MetricSpecSchema,
    AssumptionBudgetSchema,
    BasePointSchema,
    TolerancesSchema,
    EnergyOptionsSchema,
    ScenarioSchema,
)
from schemas.reports import (
    Beyond,
    RadiusValue,
    radius_min,
    PointSchema,
    ErrorBarSchema,
    BudgetAuditReport,
    SliceSummary,
    TraceReport,
    ConjugacyRow,
    IntersectionEventSchema,
    RadiusReportSchema,
    OppositeAngleResult,
    BallInclusionReport,
    SlabRow,
    SlabScanReport,
    SmallnessReport,
    TrChiDeviationReport,
    CoercivityAudit,
    ComponentIntegrals,
    FluxReportSchema,
    FluxLadderReport,
    EnergyRow,
    EnergyReportSchema,
    MetricEquivalenceReport,
    VolumeLadderRow,
    VolumeRadiusPoint,
    VolumeRadiusReport,
    VerdictRow,
    VerdictTable,
    RunManifest,
)
