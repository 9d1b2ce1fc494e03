import logging
from concurrent.futures import Executor
from dataclasses import dataclass

import numpy as np

from config import get_worker_pool
from cutlocus import injectivity_report
from exceptions import (
    BaseGeodesicError,
    BaseMetricError,
    DeltaBeyondInjectivityError,
    ResolutionTooCoarseError,
)
from flux.coefficients import leaf_sample
from flux.transport import BOOTSTRAP_BOUND, IMPROVED_BOUND, t_foliation_consistency, transport_residuals
from frames import bel_robinson_density, hodge_dual, null_decomposition, weyl_tensor
from geodesics import SphereGrid, icosphere, integrate_geodesic
from metric import MetricField, SpacetimePoint, sample
from schemas import (
    AssumptionBudgetSchema,
    Beyond,
    CoercivityAudit,
    ComponentIntegrals,
    ErrorBarSchema,
    FluxLadderReport,
    FluxReportSchema,
    PointSchema,
    RadiusValue,
    SmallnessReport,
    TolerancesSchema,
    TrChiDeviationReport,
)


logger = logging.getLogger(__name__)

COMPONENTS = ("alpha", "beta", "rho", "sigma", "betabar")


def ladder_quadrature(s_floor: float, deltas: list[float], panels: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Composite Simpson nodes on [s_floor, max(deltas)] with panel boundaries at every ladder value.

    :return: The nodes and one row of weights per delta; row k integrates over [s_floor, deltas[k]].
    """
    if not deltas or s_floor >= deltas[0]:
        raise ValueError(f"The s floor {s_floor} must lie below the first ladder value.")
    panels = panels + panels % 2
    bounds = [s_floor, *deltas]
    nodes = [s_floor]
    panel_weights = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        h = (b - a) / panels
        local = np.full(panels + 1, 2.0)
        local[1::2] = 4.0
        local[0] = local[-1] = 1.0
        panel_weights.append(local * h / 3.0)
        nodes.extend(a + h * np.arange(1, panels + 1))
    nodes = np.array(nodes)

    weights = np.zeros((len(deltas), len(nodes)))
    for k in range(len(deltas)):
        for panel, local in enumerate(panel_weights[: k + 1]):
            start = panel * panels
            weights[k, start : start + panels + 1] += local
    return nodes, weights


@dataclass
class RayProfile:
    """Integrands and foliation diagnostics of one ray at the quadrature nodes."""

    index: int
    s: np.ndarray
    valid: np.ndarray
    components: np.ndarray
    principal: np.ndarray
    remainder: np.ndarray
    direct: np.ndarray
    area_density: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    residual_phi: np.ndarray
    residual_psi: np.ndarray
    trchi: np.ndarray
    chihat_norm: np.ndarray
    zeta_norm: np.ndarray
    foliation_residual: float = 0.0
    failure: str | None = None

    @classmethod
    def empty(cls, index: int, nodes: np.ndarray) -> "RayProfile":
        count = len(nodes)
        return cls(
            index=index,
            s=nodes,
            valid=np.zeros(count, dtype=bool),
            components=np.zeros((count, len(COMPONENTS))),
            principal=np.zeros(count),
            remainder=np.zeros(count),
            direct=np.zeros(count),
            area_density=np.zeros(count),
            phi=np.ones(count),
            psi=np.zeros((count, 2)),
            residual_phi=np.zeros(count),
            residual_psi=np.zeros(count),
            trchi=np.zeros(count),
            chihat_norm=np.zeros(count),
            zeta_norm=np.zeros(count),
        )

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.phi - 1.0) + np.linalg.norm(self.psi, axis=-1)


def _profile_task(task: tuple) -> RayProfile:
    metric, p, omega, tangent, index, tolerances, nodes, with_curvature = task
    profile = RayProfile.empty(index, nodes)
    try:
        ray = integrate_geodesic(
            metric, p, omega, float(nodes[-1]), tolerances, extended=True, tangent=tangent, omega_index=index
        )
    except (BaseGeodesicError, BaseMetricError) as e:
        profile.failure = str(e)
        return profile

    last = None
    for k, s in enumerate(nodes):
        if s > ray.s_end:
            break
        try:
            leaf = leaf_sample(metric, ray, s)
            residual_phi, residual_psi, _ = transport_residuals(leaf)
            if with_curvature:
                local = sample(metric, leaf.point)
                weyl = weyl_tensor(local.riemann, local.g4, local.g4_inv)
                dual = hodge_dual(weyl, local.g4, local.g4_inv)
                components = null_decomposition(weyl, leaf.frame, leaf.g4, dual)
                density = bel_robinson_density(
                    components, leaf.phi, leaf.psi, leaf.frame, weyl, dual, leaf.g4, tolerance=tolerances.transport_tol
                )
                norms = components.squared_norms()
                profile.components[k] = [norms[name] for name in COMPONENTS]
                profile.principal[k] = density.principal
                profile.remainder[k] = density.remainder
                profile.direct[k] = density.direct
        except (BaseGeodesicError, BaseMetricError) as e:
            profile.failure = f"s = {s:.6g}: {e}"
            break
        profile.valid[k] = True
        profile.area_density[k] = leaf.area_density
        profile.phi[k] = leaf.phi
        profile.psi[k] = leaf.psi
        profile.residual_phi[k] = residual_phi
        profile.residual_psi[k] = residual_psi
        profile.trchi[k] = leaf.trchi
        profile.chihat_norm[k] = leaf.chihat_norm
        profile.zeta_norm[k] = float(np.linalg.norm(leaf.zeta))
        last = s

    if last is not None:
        try:
            profile.foliation_residual = max(t_foliation_consistency(metric, ray, last).values())
        except (BaseGeodesicError, BaseMetricError) as e:
            logger.debug("Ray %d: foliation consistency skipped: %s", index, e)
    return profile


def trace_profiles(
    metric: MetricField,
    p: SpacetimePoint,
    grid: SphereGrid,
    nodes: np.ndarray,
    tolerances: TolerancesSchema,
    with_curvature: bool = True,
    executor: Executor | None = None,
) -> list[RayProfile]:
    """Per-ray integrands at the nodes, in grid order."""
    metric.locate(p)
    executor = executor or get_worker_pool()
    tasks = [
        (metric, p, grid.vertices[i], grid.tangents[i], i, tolerances, nodes, with_curvature) for i in range(len(grid))
    ]
    profiles = list(executor.map(_profile_task, tasks))
    for profile in profiles:
        if profile.failure is not None:
            logger.warning("Ray %d profile incomplete: %s", profile.index, profile.failure)
    return profiles


def coercivity_audit(profiles: list[RayProfile], tolerance: float = 1e-12) -> CoercivityAudit:
    """
    Where |phi - 1| + |psi| stays below the bootstrap bound, check
    q_total >= 1/2 q_principal >= 1/8 (|alpha|^2 + |beta|^2 + rho^2 + sigma^2 + |betabar|^2).

    Points with vanishing curvature are not counted.
    """
    total_ratios, principal_ratios = [], []
    for profile in profiles:
        mask = profile.valid & (profile.deviation <= BOOTSTRAP_BOUND)
        component_sum = profile.components.sum(axis=1)
        mask &= component_sum > tolerance
        total = profile.principal + profile.remainder
        total_ratios.extend(total[mask] / profile.principal[mask])
        principal_ratios.extend(profile.principal[mask] / component_sum[mask])
    if not total_ratios:
        return CoercivityAudit(checked_points=0, min_total_over_principal=None, min_principal_over_components=None, passed=True)
    min_total = float(min(total_ratios))
    min_principal = float(min(principal_ratios))
    return CoercivityAudit(
        checked_points=len(total_ratios),
        min_total_over_principal=min_total,
        min_principal_over_components=min_principal,
        passed=min_total >= 0.5 and min_principal >= 0.125,
    )


def _fan_integral(values: np.ndarray, profiles: list[RayProfile], ray_weights: np.ndarray, node_weights: np.ndarray) -> float:
    """sum over rays of w_ray * sum over nodes of W_node f(s) |det A|(s); invalid nodes contribute nothing."""
    total = 0.0
    for profile, w, f in zip(profiles, ray_weights, values):
        integrand = np.where(profile.valid, f * profile.area_density, 0.0)
        total += w * float(node_weights @ integrand)
    return total


def _check_below_injectivity(
    metric: MetricField,
    p: SpacetimePoint,
    deltas: list[float],
    budget: AssumptionBudgetSchema | None,
    grid_level: int,
    tolerances: TolerancesSchema,
    executor: Executor | None,
    injectivity: RadiusValue | None,
) -> None:
    if injectivity is None:
        try:
            report = injectivity_report(
                metric, p, budget, 1.25 * max(deltas), grid_level, tolerances, executor=executor, with_error_bars=False
            )
        except ResolutionTooCoarseError as e:
            logger.warning("Injectivity precondition not checked: %s", e)
            return
        injectivity = report.i_star
    if isinstance(injectivity, Beyond):
        return
    if max(deltas) >= injectivity:
        raise DeltaBeyondInjectivityError(
            f"delta = {max(deltas):.6g} is not below the injectivity estimate {injectivity:.6g} at {p}."
        )


def flux_ladder_with_profiles(
    metric: MetricField,
    p: SpacetimePoint,
    deltas: list[float],
    grid_level: int,
    tolerances: TolerancesSchema,
    budget: AssumptionBudgetSchema | None = None,
    s_floor: float = 1e-3,
    panels: int = 8,
    executor: Executor | None = None,
    check_injectivity: bool = True,
    with_error_bars: bool = True,
    injectivity: RadiusValue | None = None,
) -> tuple[FluxLadderReport, list[RayProfile]]:
    """
    Reduced curvature flux and the Bel-Robinson flux through the cone for every delta of a ladder.

    The s-grid has panel boundaries at every ladder value and nonnegative weights, so the reduced
    flux is nondecreasing along the ladder. The contribution of [0, s_floor] is not integrated;
    it is bounded by (4 pi / 3) s_floor^3 max f and reported as the vertex error.
    """
    deltas = sorted(float(delta) for delta in deltas)
    if check_injectivity:
        _check_below_injectivity(metric, p, deltas, budget, grid_level, tolerances, executor, injectivity)

    grid = icosphere(grid_level)
    nodes, weights = ladder_quadrature(s_floor, deltas, panels)
    profiles = trace_profiles(metric, p, grid, nodes, tolerances, executor=executor)
    ray_weights = grid.areas

    missing = sum(1 for profile in profiles if not profile.valid.all())
    if missing:
        logger.warning("%d of %d rays do not cover s <= %.4g; their tail is left out.", missing, len(profiles), deltas[-1])
    if any(np.any(profile.phi[profile.valid] <= 0.0) for profile in profiles):
        logger.warning("Null lapse phi is not positive on some ray from %s.", p)

    vertex_density = max(float(profile.components[0].sum()) for profile in profiles)
    vertex_error = 4.0 * np.pi / 3.0 * s_floor**3 * vertex_density

    reports = []
    for k, delta in enumerate(deltas):
        node_weights = weights[k]
        integrals = {
            name: _fan_integral([profile.components[:, c] for profile in profiles], profiles, ray_weights, node_weights)
            for c, name in enumerate(COMPONENTS)
        }
        principal = _fan_integral([profile.principal for profile in profiles], profiles, ray_weights, node_weights)
        remainder = _fan_integral([profile.remainder for profile in profiles], profiles, ray_weights, node_weights)
        direct = _fan_integral([profile.direct for profile in profiles], profiles, ray_weights, node_weights)
        inside = nodes <= delta
        pointwise = min(
            (float(np.min((profile.principal + profile.remainder)[profile.valid & inside])) for profile in profiles if np.any(profile.valid & inside)),
            default=0.0,
        )
        component_integrals = ComponentIntegrals(**integrals)
        total = principal + remainder
        reports.append(
            FluxReportSchema(
                delta=delta,
                reduced_flux=float(np.sqrt(max(component_integrals.total(), 0.0))),
                component_integrals=component_integrals,
                total_flux=total,
                principal_flux=principal,
                remainder_flux=remainder,
                direct_flux=direct,
                positivity_margin=min(total, pointwise),
                vertex_error=vertex_error,
            )
        )

    fluxes = [report.reduced_flux for report in reports]
    monotone = all(b >= a for a, b in zip(fluxes[:-1], fluxes[1:]))
    deviation = max((float(np.max(profile.deviation[profile.valid])) for profile in profiles if profile.valid.any()), default=0.0)
    error_bars: dict[str, ErrorBarSchema] = {}
    if with_error_bars and grid_level >= 1:
        coarse = flux_ladder(
            metric,
            p,
            deltas,
            grid_level - 1,
            tolerances,
            s_floor=s_floor,
            panels=panels,
            executor=executor,
            check_injectivity=False,
            with_error_bars=False,
        )
        for name in ("reduced_flux", "total_flux"):
            fine_value = getattr(reports[-1], name)
            coarse_value = getattr(coarse.reports[-1], name)
            error_bars[name] = ErrorBarSchema(value=fine_value, coarse_value=coarse_value, error=abs(fine_value - coarse_value))

    report = FluxLadderReport(
        base=PointSchema(t=p.t, x=list(p.x), chart_id=p.chart_id),
        grid_level=grid_level,
        s_floor=s_floor,
        reports=reports,
        monotone=monotone,
        transport_residual_phi=max(float(np.max(profile.residual_phi)) for profile in profiles),
        transport_residual_psi=max(float(np.max(profile.residual_psi)) for profile in profiles),
        smallness=SmallnessReport(
            max_deviation=deviation,
            bootstrap_ok=deviation <= BOOTSTRAP_BOUND,
            improved_ok=deviation <= IMPROVED_BOUND,
        ),
        coercivity=coercivity_audit(profiles),
        foliation_residual=max(profile.foliation_residual for profile in profiles),
        error_bars=error_bars,
    )
    if not report.monotone:
        logger.warning("Reduced flux is not monotone along the ladder: %s", fluxes)
    return report, profiles


def flux_ladder(*args, **kwargs) -> FluxLadderReport:
    return flux_ladder_with_profiles(*args, **kwargs)[0]


def reduced_flux(
    metric: MetricField,
    p: SpacetimePoint,
    delta: float,
    grid_level: int,
    tolerances: TolerancesSchema,
    **kwargs,
) -> FluxReportSchema:
    return flux_ladder(metric, p, [delta], grid_level, tolerances, with_error_bars=False, **kwargs).reports[0]


def trchi_deviation(
    metric: MetricField,
    p: SpacetimePoint,
    grid_level: int,
    s_range: tuple[float, float],
    tolerances: TolerancesSchema,
    epsilon0: float,
    s_floor: float = 1e-3,
    panels: int = 8,
    executor: Executor | None = None,
    with_error_bars: bool = True,
) -> TrChiDeviationReport:
    """
    max |tr chi - 2/s| over s_range and the integral of |chihat|^2 from the vertex to the end of
    s_range, per ray, compared with epsilon0.
    """
    s_low, s_high = float(s_range[0]), float(s_range[1])
    start = min(s_floor, s_low) if s_low > 0.0 else s_floor
    ladder = [s_low, s_high] if s_low > start else [s_high]
    nodes, weights = ladder_quadrature(start, ladder, panels)
    grid = icosphere(grid_level)
    profiles = trace_profiles(metric, p, grid, nodes, tolerances, with_curvature=False, executor=executor)

    in_range = nodes >= s_low
    deviations, integrals = [], []
    for profile in profiles:
        mask = profile.valid & in_range
        deviation = np.abs(profile.trchi - 2.0 / profile.s)
        deviations.append(float(np.max(deviation[mask])) if mask.any() else float("nan"))
        integrand = np.where(profile.valid, profile.chihat_norm**2, 0.0)
        integrals.append(float(weights[-1] @ integrand))
    fan_deviation = float(np.nanmax(deviations)) if not np.all(np.isnan(deviations)) else float("nan")
    fan_integral = float(max(integrals))

    error_bars: dict[str, ErrorBarSchema] = {}
    if with_error_bars and grid_level >= 1:
        coarse = trchi_deviation(
            metric, p, grid_level - 1, s_range, tolerances, epsilon0, s_floor, panels, executor, with_error_bars=False
        )
        for name, fine_value, coarse_value in (
            ("max_trchi_deviation", fan_deviation, coarse.fan_max_trchi_deviation),
            ("chihat_integral", fan_integral, coarse.fan_max_chihat_integral),
        ):
            error_bars[name] = ErrorBarSchema(value=fine_value, coarse_value=coarse_value, error=abs(fine_value - coarse_value))

    return TrChiDeviationReport(
        s_range=(s_low, s_high),
        max_trchi_deviation=deviations,
        chihat_integral=integrals,
        fan_max_trchi_deviation=fan_deviation,
        fan_max_chihat_integral=fan_integral,
        epsilon0=epsilon0,
        within_epsilon0=fan_deviation <= epsilon0 and fan_integral <= epsilon0,
        error_bars=error_bars,
    )
