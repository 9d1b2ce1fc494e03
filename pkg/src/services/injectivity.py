import logging
from dataclasses import dataclass, field

from cutlocus import ball_inclusion_check, injectivity_report, sample_slab_points, slab_scan
from exceptions import AssumptionCViolatedError, ResolutionTooCoarseError
from schemas import BallInclusionReport, Beyond, RadiusReportSchema, SlabScanReport
from services.context import RunContext


logger = logging.getLogger(__name__)

EVENT_HEADER = ("t_event", "omega1", "omega2", "s1", "s2", "angle_at_q", "distance", "kind", "multiplicity", "unresolved")


@dataclass
class InjectivityOutcome:
    reports: list[RadiusReportSchema | None]
    unresolved: dict[int, str] = field(default_factory=dict)
    balls: dict[int, BallInclusionReport] = field(default_factory=dict)
    ball_failures: dict[int, str] = field(default_factory=dict)
    slab: SlabScanReport | None = None


def _radius(value) -> float | str:
    return f"beyond {value.beyond:.6g}" if isinstance(value, Beyond) else f"{value:.6g}"


def run_injectivity(ctx: RunContext) -> InjectivityOutcome:
    scenario, metric = ctx.scenario, ctx.metric
    outcome = InjectivityOutcome(reports=[])
    for k, p in enumerate(ctx.points):
        with ctx.timed("injectivity"):
            try:
                report = injectivity_report(
                    metric,
                    p,
                    scenario.budget,
                    scenario.s_max,
                    scenario.grid_level,
                    scenario.tolerances,
                    t_levels=scenario.t_levels,
                    level_count=scenario.level_count,
                    executor=ctx.executor,
                )
            except ResolutionTooCoarseError as e:
                logger.warning("Injectivity at %s is unresolved: %s", p, e)
                outcome.reports.append(None)
                outcome.unresolved[k] = str(e)
                continue
        outcome.reports.append(report)
        ctx.record_error_bars(f"injectivity_p{k}", report.error_bars)
        logger.info(
            "Base point %d: s* = %s, l* = %s, l*_t = %s, i* = %s.",
            k,
            _radius(report.s_star),
            _radius(report.ell_star),
            _radius(report.ell_star_t),
            _radius(report.i_star),
        )
        ctx.storage.write_json(f"injectivity_p{k}.json", report)
        ctx.storage.write_csv(
            f"events_p{k}.csv",
            EVENT_HEADER,
            [
                [
                    event.t_event,
                    event.omega1,
                    event.omega2,
                    event.s1,
                    event.s2,
                    event.angle_at_q,
                    event.distance,
                    event.kind,
                    event.multiplicity,
                    event.unresolved,
                ]
                for event in report.events
            ],
        )

        if scenario.ball_check_t is not None and scenario.ball_check_t < p.t:
            with ctx.timed("ball_inclusion"):
                try:
                    ball = ball_inclusion_check(
                        metric,
                        p,
                        scenario.ball_check_t,
                        scenario.budget.epsilon,
                        scenario.grid_level,
                        scenario.tolerances,
                        executor=ctx.executor,
                        r0=scenario.budget.r0,
                    )
                except AssumptionCViolatedError as e:
                    logger.warning("Ball inclusion at %s skipped: %s", p, e)
                    outcome.ball_failures[k] = str(e)
                else:
                    outcome.balls[k] = ball
                    ctx.storage.write_json(f"ball_p{k}.json", ball)

    if scenario.scan_points > 0:
        with ctx.timed("slab_scan"):
            chart_id = ctx.points[0].chart_id
            points = sample_slab_points(metric, metric.interval, scenario.scan_points, scenario.seed, chart_id)
            try:
                outcome.slab = slab_scan(
                    metric,
                    points,
                    scenario.budget,
                    scenario.s_max,
                    scenario.grid_level,
                    scenario.tolerances,
                    level_count=scenario.level_count,
                    executor=ctx.executor,
                )
            except ResolutionTooCoarseError as e:
                logger.warning("Slab scan is unresolved: %s", e)
            else:
                ctx.storage.write_json("slab_scan.json", outcome.slab)
    return outcome
