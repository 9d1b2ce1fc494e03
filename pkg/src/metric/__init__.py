from metric.interfaces import (
    SpacetimePoint,
    ChartDescriptor,
    MetricJet,
    DerivativeProvider,
    MetricField,
)
from metric.derivatives import AnalyticDerivatives, FiniteDifferenceDerivatives
from metric.families import (
    Minkowski,
    ConstantLapse,
    FlatTorus,
    LapseBump,
    ExponentialMetric,
    SphericalCylinder,
    PerturbedTorus,
)
from metric.norms import orthonormal_triad, adapted_frame, frame_components, riemannian_norm, spatial_norm
from metric.sampling import (
    MetricSample,
    DeformationSample,
    sample,
    sample_batch,
    connection,
    second_fundamental_form,
    deformation_tensor,
    deformation_from_sample,
    geometric_deformation,
    normal_covariant_derivative,
    curvature_audit,
)
from metric.audit import AuditGrid, budget_audit, equivalence_constant, curvature_norm
from metric.factory import METRIC_FAMILIES, build_metric
