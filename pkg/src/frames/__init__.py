from frames.null_frame import (
    NullFrame,
    initial_null_vector,
    null_frame,
    conjugate_null_vector,
    gram_schmidt,
    frame_audit,
    volume_form,
    spacetime_metric_at,
    unit_normal,
)
from frames.curvature import (
    NullCurvatureComponents,
    ElectricMagnetic,
    BelRobinsonDensity,
    permutation_symbol,
    levi_civita,
    ricci_tensor,
    weyl_tensor,
    hodge_dual,
    null_decomposition,
    electric_magnetic,
    curvature_from_electric_magnetic,
    bel_robinson_contract,
    bel_robinson_tensor,
    bel_robinson_audit,
    bel_robinson_density,
    principal_density,
)
