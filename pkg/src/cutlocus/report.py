import logging
from concurrent.futures import Executor

import numpy as np

from cutlocus.intersections import detect_intersections
from exceptions import ResolutionTooCoarseError
from geodesics import RayFan, conjugacy_radius, icosphere, trace_fan
from metric import MetricField, SpacetimePoint
from schemas import (
    AssumptionBudgetSchema,
    Beyond,
    ErrorBarSchema,
    PointSchema,
    RadiusReportSchema,
    RadiusValue,
    SlabRow,
    SlabScanReport,
    TolerancesSchema,
    radius_min,
)


logger = logging.getLogger(__name__)


def default_t_levels(fan: RayFan, level_count: int) -> list[float]:
    depth = fan.t_depth()
    return [fan.base.t - depth * k / level_count for k in range(1, level_count + 1)]


def _finite(value: RadiusValue) -> float | None:
    return None if isinstance(value, Beyond) else float(value)


def radius_error_bar(fine: RadiusValue, coarse: RadiusValue | None, unresolved: bool = False) -> ErrorBarSchema:
    value = _finite(fine)
    coarse_value = None if coarse is None else _finite(coarse)
    error = abs(value - coarse_value) if value is not None and coarse_value is not None else None
    return ErrorBarSchema(value=value, coarse_value=coarse_value, error=error, unresolved=unresolved)


def injectivity_report(
    metric: MetricField,
    p: SpacetimePoint,
    budget: AssumptionBudgetSchema | None,
    s_max: float,
    grid_level: int,
    tolerances: TolerancesSchema,
    t_levels: list[float] | None = None,
    level_count: int = 24,
    executor: Executor | None = None,
    with_error_bars: bool = True,
    fan: RayFan | None = None,
) -> RadiusReportSchema:
    """
    Conjugacy radius, first intersection times and their minimum from one vertex.

    Events are scanned slice by slice until the first slice that yields any; s_max bounds the
    affine depth and the deepest slice is the one every ray reaches. With error bars the whole
    analysis is repeated one grid level down.
    """
    grid = icosphere(grid_level)
    if fan is None or not fan.extended or fan.grid.level != grid_level:
        fan = trace_fan(metric, p, grid, s_max, tolerances, extended=True, executor=executor)
    s_star, rows, excluded = conjugacy_radius(metric, p, grid, s_max, tolerances, fan=fan)
    conjugate_table = {row.omega_index: row.first_zero for row in rows if not isinstance(row.first_zero, Beyond)}

    levels = t_levels if t_levels is not None else default_t_levels(fan, level_count)
    events, _ = detect_intersections(
        metric,
        fan,
        levels,
        match_factor=tolerances.match_factor,
        conjugate_table=conjugate_table,
        stop_after_first=True,
    )

    depth = p.t - min(levels) if levels else 0.0
    if events:
        ell_star: RadiusValue = min(min(event.s1, event.s2) for event in events)
        ell_star_t: RadiusValue = p.t - max(event.t_event for event in events)
    else:
        ell_star = Beyond(beyond=min(ray.s_end for ray in fan.rays if ray is not None))
        ell_star_t = Beyond(beyond=depth)
    i_star = radius_min(ell_star, s_star)
    if budget is not None and not isinstance(i_star, Beyond) and i_star < budget.delta_star:
        logger.warning("Injectivity estimate %.4g at %s is below the declared delta_star %.4g.", i_star, p, budget.delta_star)

    radii = {"s_star": s_star, "ell_star": ell_star, "ell_star_t": ell_star_t, "i_star": i_star}
    error_bars: dict[str, ErrorBarSchema] = {}
    if with_error_bars and grid_level >= 1:
        try:
            coarse = injectivity_report(
                metric, p, None, s_max, grid_level - 1, tolerances, t_levels=levels, executor=executor, with_error_bars=False
            )
            for name, value in radii.items():
                error_bars[name] = radius_error_bar(value, getattr(coarse, name))
        except ResolutionTooCoarseError:
            for name, value in radii.items():
                error_bars[name] = radius_error_bar(value, None, unresolved=True)

    return RadiusReportSchema(
        base=PointSchema(t=p.t, x=list(p.x), chart_id=p.chart_id),
        s_star=s_star,
        ell_star=ell_star,
        ell_star_t=ell_star_t,
        i_star=i_star,
        events=events,
        grid_level=grid_level,
        n_rays=len(grid),
        spacing=grid.spacing,
        excluded_rays=excluded,
        error_bars=error_bars,
    )


def sample_slab_points(metric: MetricField, t_interval: tuple[float, float], count: int, seed: int, chart_id: str = "main") -> list[SpacetimePoint]:
    """Uniform random base points in a slab of a bounded (or periodic) chart."""
    chart = metric.chart(chart_id)
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(count):
        x = []
        for axis in range(3):
            lower = chart.lower[axis]
            upper = lower + chart.periods[axis] if chart.is_periodic(axis) else chart.upper[axis]
            if not np.isfinite(lower) or not np.isfinite(upper):
                lower, upper = -chart.scale, chart.scale
            x.append(float(rng.uniform(lower, upper)))
        points.append(SpacetimePoint.of(float(rng.uniform(*t_interval)), x, chart_id))
    return points


def slab_scan(
    metric: MetricField,
    points: list[SpacetimePoint],
    budget: AssumptionBudgetSchema | None,
    s_max: float,
    grid_level: int,
    tolerances: TolerancesSchema,
    level_count: int = 24,
    executor: Executor | None = None,
) -> SlabScanReport:
    """Injectivity reports over sampled base points, with the slab minima."""
    rows = []
    for p in points:
        report = injectivity_report(
            metric, p, budget, s_max, grid_level, tolerances, level_count=level_count, executor=executor, with_error_bars=False
        )
        rows.append(
            SlabRow(
                point=report.base,
                s_star=report.s_star,
                ell_star=report.ell_star,
                ell_star_t=report.ell_star_t,
                i_star=report.i_star,
            )
        )
    return SlabScanReport(
        rows=rows,
        min_s_star=radius_min(*(row.s_star for row in rows)),
        min_ell_star=radius_min(*(row.ell_star for row in rows)),
        min_ell_star_t=radius_min(*(row.ell_star_t for row in rows)),
        min_i_star=radius_min(*(row.i_star for row in rows)),
    )
