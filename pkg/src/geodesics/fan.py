import logging
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from config import get_worker_pool
from exceptions import (
    AtlasExitError,
    BaseGeodesicError,
    BaseMetricError,
    LevelOutOfRangeError,
    PointOutsideAtlasError,
)
from geodesics.grid import SphereGrid
from geodesics.integrator import NullGeodesic, RayLevelPoint, integrate_geodesic, reparametrize
from metric import MetricField, SpacetimePoint
from schemas import SliceSummary, TolerancesSchema


logger = logging.getLogger(__name__)

LevelKind = Literal["fixed-s", "fixed-t"]


@dataclass
class RayFan:
    base: SpacetimePoint
    grid: SphereGrid
    rays: list[NullGeodesic | None]
    failures: dict[int, str]
    s_max: float
    extended: bool

    def traced(self) -> list[int]:
        return [i for i, ray in enumerate(self.rays) if ray is not None]

    @property
    def null_residual_max(self) -> float:
        return max((ray.null_residual_max for ray in self.rays if ray is not None), default=0.0)

    @property
    def killing_residual_max(self) -> float | None:
        values = [ray.killing_residual_max for ray in self.rays if ray is not None and ray.killing_residual_max is not None]
        return max(values) if values else None

    def t_depth(self) -> float:
        """Deepest time below the vertex reached by every traced ray."""
        return min(self.base.t - ray.t_range[0] for ray in self.rays if ray is not None)


@dataclass
class ConeSlice:
    kind: LevelKind
    level: float
    base: SpacetimePoint
    points: dict[int, RayLevelPoint]
    coverage: np.ndarray
    past_crossing: np.ndarray
    cell_metrics: dict[int, np.ndarray] = field(default_factory=dict)
    cell_areas: dict[int, float] = field(default_factory=dict)

    @property
    def area(self) -> float:
        return float(sum(self.cell_areas.values()))

    @property
    def radius(self) -> float:
        return float(np.sqrt(self.area / (4.0 * np.pi)))

    def summary(self, round_ratio: float | None = None) -> SliceSummary:
        return SliceSummary(
            kind=self.kind,
            level=self.level,
            area=self.area,
            radius=self.radius,
            coverage=float(np.mean(self.coverage)),
            round_ratio=round_ratio,
        )


def _trace_task(task: tuple) -> tuple[int, NullGeodesic | None, str | None]:
    metric, p, omega, tangent, index, s_max, tolerances, extended, t_stop = task
    try:
        ray = integrate_geodesic(
            metric, p, omega, s_max, tolerances, extended=extended, t_stop=t_stop, tangent=tangent, omega_index=index
        )
        return index, ray, None
    except (BaseGeodesicError, BaseMetricError) as e:
        return index, None, str(e)


def trace_fan(
    metric: MetricField,
    p: SpacetimePoint,
    grid: SphereGrid,
    s_max: float,
    tolerances: TolerancesSchema,
    extended: bool = False,
    t_stop: float | None = None,
    executor: Executor | None = None,
) -> RayFan:
    """Trace one past null ray per grid direction; failed rays are kept as None with a reason."""
    metric.locate(p)
    executor = executor or get_worker_pool()
    tasks = [
        (metric, p, grid.vertices[i], grid.tangents[i], i, s_max, tolerances, extended, t_stop)
        for i in range(len(grid))
    ]
    rays: list[NullGeodesic | None] = [None] * len(grid)
    failures: dict[int, str] = {}
    for index, ray, failure in executor.map(_trace_task, tasks):
        rays[index] = ray
        if failure is not None:
            failures[index] = failure
            logger.warning("Ray %d failed: %s", index, failure)
    logger.info("Traced %d/%d rays from %s.", len(grid) - len(failures), len(grid), p)
    return RayFan(base=p, grid=grid, rays=rays, failures=failures, s_max=s_max, extended=extended)


def _cell_metric(metric: MetricField, points: list[RayLevelPoint]) -> np.ndarray | None:
    """Gram matrix of the two edge vectors of a triangle, measured at its first vertex."""
    anchor = points[0]
    chart = metric.chart(anchor.chart_id)
    n = float(metric.lapse(anchor.t, anchor.x, anchor.chart_id))
    g = metric.spatial_metric(anchor.t, anchor.x, anchor.chart_id)
    edges = []
    for other in points[1:]:
        x = other.x
        if other.chart_id != anchor.chart_id:
            target, x, _ = metric.transition(other.chart_id, other.x)
            if target != anchor.chart_id:
                return None
        dx = chart.minimal_image(np.asarray(x) - anchor.x)
        edges.append(np.concatenate([[other.t - anchor.t], dx]))
    g4 = np.zeros((4, 4))
    g4[0, 0] = -n * n
    g4[1:, 1:] = g
    edges = np.array(edges)
    return edges @ g4 @ edges.T


def exponential_map(
    metric: MetricField,
    p: SpacetimePoint,
    grid: SphereGrid,
    levels: list[tuple[LevelKind, float]],
    fan: RayFan | None = None,
    tolerances: TolerancesSchema | None = None,
    s_max: float | None = None,
    crossing_s: dict[int, float] | None = None,
    executor: Executor | None = None,
) -> list[ConeSlice]:
    """
    Cone slices at fixed affine parameter or fixed coordinate time.

    Rays that end before a level are reported as not covered. When first-crossing parameters
    are given, points beyond them are flagged as past the crossing.
    """
    if fan is None:
        deepest = max([level for kind, level in levels if kind == "fixed-s"], default=0.0)
        depth = max([p.t - level for kind, level in levels if kind == "fixed-t"], default=0.0)
        fan = trace_fan(
            metric,
            p,
            grid,
            s_max or max(1.01 * deepest, 4.0 * depth, 1.0),
            tolerances or TolerancesSchema(),
            executor=executor,
        )
    crossing_s = crossing_s or {}
    slices = []
    for kind, level in levels:
        points: dict[int, RayLevelPoint] = {}
        for i, ray in enumerate(fan.rays):
            if ray is None:
                continue
            try:
                if kind == "fixed-s":
                    points[i] = ray.level_point(level, metric.chart)
                else:
                    points[i] = reparametrize(ray, level, metric.chart)
            except (AtlasExitError, LevelOutOfRangeError):
                continue
        coverage = np.zeros(len(grid), dtype=bool)
        coverage[list(points)] = True
        past = np.array([i in points and i in crossing_s and points[i].s > crossing_s[i] for i in range(len(grid))])

        cone_slice = ConeSlice(kind=kind, level=level, base=p, points=points, coverage=coverage, past_crossing=past)
        for face_index, face in enumerate(grid.faces):
            if not all(int(vertex) in points for vertex in face):
                continue
            try:
                sigma = _cell_metric(metric, [points[int(vertex)] for vertex in face])
            except PointOutsideAtlasError:
                sigma = None
            if sigma is None:
                continue
            cone_slice.cell_metrics[face_index] = sigma
            cone_slice.cell_areas[face_index] = 0.5 * float(np.sqrt(max(np.linalg.det(sigma), 0.0)))
        slices.append(cone_slice)
    return slices


def round_ratio(metric: MetricField, cone_slice: ConeSlice) -> float | None:
    """Ratio of the largest to the smallest distance from the vertex's spatial position on a fixed-t slice."""
    if cone_slice.kind != "fixed-t" or not cone_slice.points:
        return None
    p = cone_slice.base
    distances = [
        metric.separation(point.t, np.asarray(p.x), p.chart_id, point.x, point.chart_id)
        for point in cone_slice.points.values()
    ]
    smallest = min(distances)
    return float(max(distances) / smallest) if smallest > 0.0 else None
