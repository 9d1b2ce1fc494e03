from typing import Literal

from pydantic import BaseModel, Field


class Beyond(BaseModel):
    """No event below the horizon; serialized as {"beyond": s_max}."""

    beyond: float

    model_config = {"frozen": True}


RadiusValue = float | Beyond


def radius_min(*values: RadiusValue) -> RadiusValue:
    finite = [value for value in values if not isinstance(value, Beyond)]
    if finite:
        return min(finite)
    return Beyond(beyond=min(value.beyond for value in values))


class PointSchema(BaseModel):
    t: float
    x: list[float]
    chart_id: str = "main"


class ErrorBarSchema(BaseModel):
    value: float | None
    coarse_value: float | None = None
    error: float | None = None
    unresolved: bool = False


class BudgetAuditReport(BaseModel):
    sup_lapse: float
    sup_inverse_lapse: float
    sup_deformation: float
    interval_length: float
    deformation_times_interval: float
    initial_equivalence: float
    sup_curvature: float
    checks: dict[str, bool]
    passed: bool


class SliceSummary(BaseModel):
    kind: Literal["fixed-s", "fixed-t"]
    level: float
    area: float
    radius: float
    coverage: float
    round_ratio: float | None = None


class TraceReport(BaseModel):
    base: PointSchema
    grid_level: int
    n_rays: int
    null_residual_max: float
    killing_residual_max: float | None
    censored: list[int]
    slices: list[SliceSummary]


class ConjugacyRow(BaseModel):
    omega_index: int
    first_zero: RadiusValue


class IntersectionEventSchema(BaseModel):
    t_event: float
    q: PointSchema
    omega1: int
    omega2: int
    s1: float
    s2: float
    angle_at_q: float
    windings: tuple[list[int], list[int]]
    distance: float
    kind: Literal["crossing", "conjugate"] = "crossing"
    unresolved: bool = False
    multiplicity: int = 1


class RadiusReportSchema(BaseModel):
    base: PointSchema
    s_star: RadiusValue
    ell_star: RadiusValue
    ell_star_t: RadiusValue
    i_star: RadiusValue
    events: list[IntersectionEventSchema]
    grid_level: int
    n_rays: int
    spacing: float
    excluded_rays: list[int]
    error_bars: dict[str, ErrorBarSchema] = Field(default_factory=dict)


class OppositeAngleResult(BaseModel):
    deviation: float | None
    angle: float | None
    skipped: bool = False
    reason: str = ""


class BallInclusionReport(BaseModel):
    t_level: float
    eps_declared: float
    eps_audited: float
    inner_ok: bool
    outer_ok: bool
    annulus_ok: bool
    inner_margin: float
    outer_margin: float
    annulus_margin: float


class SlabRow(BaseModel):
    point: PointSchema
    s_star: RadiusValue
    ell_star: RadiusValue
    ell_star_t: RadiusValue
    i_star: RadiusValue


class SlabScanReport(BaseModel):
    rows: list[SlabRow]
    min_s_star: RadiusValue
    min_ell_star: RadiusValue
    min_ell_star_t: RadiusValue
    min_i_star: RadiusValue


class SmallnessReport(BaseModel):
    max_deviation: float
    bootstrap_ok: bool
    improved_ok: bool


class TrChiDeviationReport(BaseModel):
    s_range: tuple[float, float]
    max_trchi_deviation: list[float]
    chihat_integral: list[float]
    fan_max_trchi_deviation: float
    fan_max_chihat_integral: float
    epsilon0: float
    within_epsilon0: bool
    error_bars: dict[str, ErrorBarSchema] = Field(default_factory=dict)


class CoercivityAudit(BaseModel):
    checked_points: int
    min_total_over_principal: float | None
    min_principal_over_components: float | None
    passed: bool


class ComponentIntegrals(BaseModel):
    alpha: float
    beta: float
    rho: float
    sigma: float
    betabar: float

    def total(self) -> float:
        return self.alpha + self.beta + self.rho + self.sigma + self.betabar


class FluxReportSchema(BaseModel):
    delta: float
    reduced_flux: float
    component_integrals: ComponentIntegrals
    total_flux: float
    principal_flux: float
    remainder_flux: float
    direct_flux: float
    positivity_margin: float
    vertex_error: float


class FluxLadderReport(BaseModel):
    base: PointSchema
    grid_level: int
    s_floor: float
    reports: list[FluxReportSchema]
    monotone: bool
    transport_residual_phi: float
    transport_residual_psi: float
    smallness: SmallnessReport
    coercivity: CoercivityAudit
    foliation_residual: float
    error_bars: dict[str, ErrorBarSchema] = Field(default_factory=dict)


class EnergyRow(BaseModel):
    t: float
    Q: float
    L2_curvature: float
    gronwall_bound: float
    pi_sup: float
    pi_integral: float


class EnergyReportSchema(BaseModel):
    ladder: list[EnergyRow]
    budget_constant: float
    empirical_constant: float
    holds: bool
    initial_curvature_ok: bool
    error_bars: dict[str, ErrorBarSchema] = Field(default_factory=dict)


class MetricEquivalenceReport(BaseModel):
    lambda_min: float
    lambda_max: float
    initial_constant: float
    empirical_constant: float
    predicted_constant: float
    initial_ok: bool
    passed: bool


class VolumeLadderRow(BaseModel):
    r: float
    volume: float
    ratio: float
    method: Literal["polar", "counting"]


class VolumeRadiusPoint(BaseModel):
    point: list[float]
    r_vol: float
    argmin_r: float
    min_cut_radius: RadiusValue
    ladder: list[VolumeLadderRow]


class VolumeRadiusReport(BaseModel):
    t_level: float
    rho: float
    points: list[VolumeRadiusPoint]
    slice_infimum: float


class VerdictRow(BaseModel):
    check: str
    anchor: str
    verdict: Literal["pass", "fail", "unresolved"]
    value: float | None = None
    threshold: float | None = None
    asserted: bool = True
    detail: str = ""


class RunManifest(BaseModel):
    command: str
    scenario_hash: str
    tool_version: str
    wall_times: dict[str, float]
    error_bars: dict[str, ErrorBarSchema] = Field(default_factory=dict)
    verdicts: list[VerdictRow] = Field(default_factory=list)
    artifacts: list[str] = Field(default_factory=list)
    scenario: dict


class VerdictTable(BaseModel):
    scenario: str
    rows: list[VerdictRow]
