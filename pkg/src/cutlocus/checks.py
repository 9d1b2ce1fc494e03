import logging
import math
from concurrent.futures import Executor

import numpy as np

from exceptions import AssumptionCViolatedError, AtlasExitError, LevelOutOfRangeError
from geodesics import RayFan, icosphere, reparametrize, trace_fan
from metric import MetricField, SpacetimePoint
from schemas import BallInclusionReport, IntersectionEventSchema, OppositeAngleResult, TolerancesSchema


logger = logging.getLogger(__name__)

SEGMENT_NODES = 16
INNER_RADIUS_FRACTIONS = (0.25, 0.5, 0.75, 1.0)


def opposite_angle_check(event: IntersectionEventSchema) -> OppositeAngleResult:
    """|angle - pi| at a first crossing; skipped at conjugate points where the tangents need not oppose."""
    if event.kind == "conjugate":
        return OppositeAngleResult(deviation=None, angle=event.angle_at_q, skipped=True, reason="near-conjugate")
    if event.angle_at_q is None or math.isnan(event.angle_at_q):
        return OppositeAngleResult(deviation=None, angle=None, skipped=True, reason="tangents in unrelated charts")
    return OppositeAngleResult(deviation=abs(event.angle_at_q - math.pi), angle=event.angle_at_q)


def _ball_nodes(center: np.ndarray, radius: float, per_axis: int = 9) -> np.ndarray:
    axis = np.linspace(-radius, radius, per_axis)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    return center + grid[np.linalg.norm(grid, axis=1) <= radius + 1e-12]


def audited_epsilon(metric: MetricField, p: SpacetimePoint, t_level: float, radius: float) -> float:
    """max |n - n(p)| and |g_ij - delta_ij| over a coordinate ball around p between t_level and t(p)."""
    center = np.asarray(p.x, dtype=float)
    n_p = float(metric.lapse(p.t, center, p.chart_id))
    nodes = _ball_nodes(center, radius)
    eps = 0.0
    for t in np.linspace(t_level, p.t, 5):
        n = metric.lapse(t, nodes, p.chart_id)
        g = metric.spatial_metric(t, nodes, p.chart_id)
        eps = max(eps, float(np.max(np.abs(n - n_p))), float(np.max(np.abs(g - np.eye(3)))))
    return eps


def ball_inclusion_check(
    metric: MetricField,
    p: SpacetimePoint,
    t_level: float,
    eps: float,
    grid_level: int,
    tolerances: TolerancesSchema,
    fan: RayFan | None = None,
    executor: Executor | None = None,
    tolerance: float = 1e-8,
    r0: float | None = None,
) -> BallInclusionReport:
    """
    Compare the cone slice at t_level with Euclidean coordinate balls about p.

    Time is measured from p in units of the lapse at p, tau = n(p) (t_level - t(p)). The slice
    must lie within (1 + 3 eps)|tau| and outside (1 - 3 eps)|tau|, and straight segments from p
    to the inner ball must be timelike.

    With r0 given, the level must lie in the window -r0/3 <= t_level - t(p).
    """
    if t_level >= p.t:
        raise LevelOutOfRangeError(f"Ball check level {t_level} must lie below t(p) = {p.t}.")
    if r0 is not None and t_level - p.t < -r0 / 3.0:
        raise AssumptionCViolatedError(
            f"Ball check level {t_level} lies below the window t(p) - r0/3 = {p.t - r0 / 3.0:.6g}."
        )
    center = np.asarray(p.x, dtype=float)
    n_p = float(metric.lapse(p.t, center, p.chart_id))
    dt = t_level - p.t
    tau = abs(n_p * dt)
    outer_radius = (1.0 + 3.0 * eps) * tau
    inner_radius = max((1.0 - 3.0 * eps) * tau, 0.0)

    eps_audited = audited_epsilon(metric, p, t_level, outer_radius)
    if eps < eps_audited:
        raise AssumptionCViolatedError(f"Declared eps {eps:.3g} is below the audited {eps_audited:.3g}.")

    grid = icosphere(grid_level)
    if fan is None:
        fan = trace_fan(metric, p, grid, 2.0 * tau * (1.0 + 3.0 * eps) + 1e-6, tolerances, executor=executor)
    chart = metric.chart(p.chart_id)
    radii = []
    for ray in fan.rays:
        if ray is None:
            continue
        try:
            point = reparametrize(ray, t_level, metric.chart)
        except (LevelOutOfRangeError, AtlasExitError):
            continue
        radii.append(float(np.linalg.norm(chart.minimal_image(point.x - center))))
    if not radii:
        raise LevelOutOfRangeError(f"No ray reaches t = {t_level}.")
    outer_margin = outer_radius - max(radii)
    annulus_margin = min(radii) - inner_radius

    inner_margin = math.inf
    lambdas = np.linspace(0.0, 1.0, SEGMENT_NODES + 1)[1:]
    for direction in grid.vertices:
        for fraction in INNER_RADIUS_FRACTIONS:
            y = fraction * inner_radius * direction
            points = center + lambdas[:, None] * y
            times = p.t + lambdas * dt
            n = metric.lapse(times, points, p.chart_id)
            g = metric.spatial_metric(times, points, p.chart_id)
            spatial = np.sqrt(np.einsum("i,sij,j->s", y, g, y))
            inner_margin = min(inner_margin, float(np.min(n * abs(dt) - spatial)))

    report = BallInclusionReport(
        t_level=t_level,
        eps_declared=eps,
        eps_audited=eps_audited,
        inner_ok=inner_margin >= -tolerance,
        outer_ok=outer_margin >= -tolerance,
        annulus_ok=annulus_margin >= -tolerance,
        inner_margin=inner_margin,
        outer_margin=outer_margin,
        annulus_margin=annulus_margin,
    )
    if not (report.inner_ok and report.outer_ok and report.annulus_ok):
        logger.warning("Ball inclusion fails at t = %.4g: %s", t_level, report.model_dump())
    return report
