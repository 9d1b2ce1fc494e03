import logging

from cutlocus import default_t_levels
from geodesics import RayFan, exponential_map, icosphere, round_ratio, trace_fan
from schemas import PointSchema, TraceReport
from services.context import RunContext


logger = logging.getLogger(__name__)

FIXED_S_FRACTIONS = (0.25, 0.5, 0.75)
FIXED_T_LEVELS = 4

RAY_HEADER = ("omega_index", "s", "t", "x1", "x2", "x3", "chart")
SLICE_HEADER = ("kind", "level", "omega_index", "s", "t", "x1", "x2", "x3", "chart", "past_crossing")


def _ray_rows(fan: RayFan) -> list[list]:
    rows = []
    for index in fan.traced():
        s_values, states, charts = fan.rays[index].steps()
        for s, y, chart_id in zip(s_values, states, charts):
            rows.append([index, float(s), float(y[0]), float(y[1]), float(y[2]), float(y[3]), chart_id])
    return rows


def trace_point(ctx: RunContext, k: int) -> TraceReport:
    """Trace the fan from the k-th base point and slice it at a few s and t levels."""
    scenario, metric, p = ctx.scenario, ctx.metric, ctx.points[k]
    grid = icosphere(scenario.grid_level)
    with ctx.timed("trace"):
        fan = trace_fan(metric, p, grid, scenario.s_max, scenario.tolerances, executor=ctx.executor)
        t_levels = scenario.t_levels or default_t_levels(fan, FIXED_T_LEVELS)
        levels = [("fixed-s", scenario.s_max * fraction) for fraction in FIXED_S_FRACTIONS]
        levels += [("fixed-t", t) for t in t_levels]
        slices = exponential_map(metric, p, grid, levels, fan=fan)

    report = TraceReport(
        base=PointSchema(t=p.t, x=list(p.x), chart_id=p.chart_id),
        grid_level=scenario.grid_level,
        n_rays=len(grid),
        null_residual_max=fan.null_residual_max,
        killing_residual_max=fan.killing_residual_max,
        censored=sorted(fan.failures),
        slices=[cone_slice.summary(round_ratio(metric, cone_slice)) for cone_slice in slices],
    )
    if report.censored:
        logger.warning("%d rays from %s were censored.", len(report.censored), p)

    slice_rows = []
    for cone_slice in slices:
        for index, point in sorted(cone_slice.points.items()):
            slice_rows.append(
                [
                    cone_slice.kind,
                    cone_slice.level,
                    index,
                    point.s,
                    point.t,
                    *(float(value) for value in point.x),
                    point.chart_id,
                    bool(cone_slice.past_crossing[index]),
                ]
            )
    ctx.storage.write_json(f"trace_p{k}.json", report)
    ctx.storage.write_csv(f"rays_p{k}.csv", RAY_HEADER, _ray_rows(fan))
    ctx.storage.write_csv(f"slices_p{k}.csv", SLICE_HEADER, slice_rows)
    return report


def run_trace(ctx: RunContext) -> list[TraceReport]:
    return [trace_point(ctx, k) for k in range(len(ctx.points))]
