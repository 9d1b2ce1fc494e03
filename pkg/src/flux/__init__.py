from flux.coefficients import LeafSample, LeafGeometry, RicciCoefficients, leaf_sample, ricci_coefficients, leaf_geometry
from flux.transport import (
    TransportState,
    OrderStudy,
    BOOTSTRAP_BOUND,
    IMPROVED_BOUND,
    foliation_scalars,
    transport_residuals,
    smallness_monitor,
    t_foliation_consistency,
    transport_order,
)
from flux.reduced_flux import (
    RayProfile,
    ladder_quadrature,
    trace_profiles,
    coercivity_audit,
    flux_ladder,
    flux_ladder_with_profiles,
    reduced_flux,
    trchi_deviation,
)
