import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from cutlocus.spatial_hash import SpatialHash
from exceptions import AtlasExitError, LevelOutOfRangeError, PointOutsideAtlasError, ResolutionTooCoarseError
from geodesics import RayFan, RayLevelPoint, reparametrize
from metric import MetricField
from schemas import IntersectionEventSchema, PointSchema


logger = logging.getLogger(__name__)

ANGULAR_FLOOR = 1.5
UNRESOLVED_BAND = 1.0
RESOLUTION_RATIO = 0.25
CONJUGATE_TOLERANCE = 1e-4
CLUSTER_TIME_TOLERANCE = 1e-6


@dataclass
class LevelSnapshot:
    """Ray positions on one slice with the resolution diagnostics of the fan there."""

    t: float
    points: dict[int, RayLevelPoint]
    embedded: dict[int, np.ndarray]
    neighbor_distance: float = 0.0
    interpolation_error: float = 0.0
    embed_scale: float = 1.0
    speed: float = 1.0
    match_tol: float = 0.0

    @property
    def resolvable(self) -> bool:
        return self.neighbor_distance > 0.0 and self.interpolation_error <= RESOLUTION_RATIO * self.neighbor_distance

    def diagnostics(self) -> dict:
        return {
            "t": self.t,
            "rays": len(self.points),
            "neighbor_distance": self.neighbor_distance,
            "interpolation_error": self.interpolation_error,
            "match_tol": self.match_tol,
            "resolvable": self.resolvable,
        }


@dataclass
class Candidate:
    i: int
    j: int
    t: float
    distance: float
    level_tol: float
    first: RayLevelPoint
    second: RayLevelPoint
    unresolved: bool = False
    multiplicity: int = 1
    kind: str = "crossing"
    angle: float = float("nan")


def _minimal_image(delta: np.ndarray, periods: tuple) -> np.ndarray:
    delta = np.array(delta, dtype=float)
    for axis, period in enumerate(periods):
        if period is not None:
            delta[..., axis] -= period * np.round(delta[..., axis] / period)
    return delta


def level_snapshot(metric: MetricField, fan: RayFan, t_level: float, match_factor: float) -> LevelSnapshot:
    points: dict[int, RayLevelPoint] = {}
    for i, ray in enumerate(fan.rays):
        if ray is None:
            continue
        try:
            points[i] = reparametrize(ray, t_level, metric.chart)
        except (LevelOutOfRangeError, AtlasExitError):
            continue
    embedded = {i: metric.embed(point.x, point.chart_id) for i, point in points.items()}
    snapshot = LevelSnapshot(t=t_level, points=points, embedded=embedded)
    if len(points) < 4:
        return snapshot

    periods = metric.embed_periods(fan.base.chart_id)
    embed_distances, metric_distances, errors = [], [], []
    for i, point in points.items():
        neighbors = [j for j in fan.grid.neighbors[i] if j in points]
        if not neighbors:
            continue
        deltas = _minimal_image(np.array([embedded[j] - embedded[i] for j in neighbors]), periods)
        embed_distances.extend(np.linalg.norm(deltas, axis=1))
        if len(neighbors) == len(fan.grid.neighbors[i]):
            errors.append(float(np.linalg.norm(deltas.mean(axis=0))))
        for j in neighbors:
            if j > i:
                try:
                    metric_distances.append(metric.separation(t_level, point.x, point.chart_id, points[j].x, points[j].chart_id))
                except PointOutsideAtlasError:
                    continue
    if not embed_distances or not metric_distances or not errors:
        return snapshot

    embed_median = float(np.median(embed_distances))
    metric_median = float(np.median(metric_distances))
    scale = metric_median / embed_median if embed_median > 0.0 else 1.0
    snapshot.embed_scale = scale
    snapshot.neighbor_distance = metric_median
    snapshot.interpolation_error = max(errors) * scale
    snapshot.match_tol = min(match_factor * snapshot.interpolation_error, RESOLUTION_RATIO * metric_median)

    speeds = []
    for point in points.values():
        v = point.velocity
        g = metric.spatial_metric(point.t, point.x, point.chart_id)
        speeds.append(np.sqrt(max(v[1:] @ g @ v[1:], 0.0)) / max(abs(v[0]), 1e-300))
    snapshot.speed = float(max(speeds))
    return snapshot


def _pair_distance(metric: MetricField, fan: RayFan, i: int, j: int, t: float) -> tuple[float, RayLevelPoint, RayLevelPoint]:
    a = reparametrize(fan.rays[i], t, metric.chart)
    b = reparametrize(fan.rays[j], t, metric.chart)
    return metric.separation(t, a.x, a.chart_id, b.x, b.chart_id), a, b


def crossing_angle(metric: MetricField, first: RayLevelPoint, second: RayLevelPoint) -> float:
    """Angle at q between the spatial projections of the two ray tangents, measured with g."""
    a = first.velocity[1:]
    b = second.velocity[1:]
    if second.chart_id != first.chart_id:
        target, _, jacobian = metric.transition(second.chart_id, second.x)
        if target != first.chart_id:
            raise PointOutsideAtlasError("Cannot compare tangents across unrelated charts.")
        b = jacobian @ b
    g = metric.spatial_metric(first.t, first.x, first.chart_id)
    cosine = (a @ g @ b) / np.sqrt((a @ g @ a) * (b @ g @ b))
    return float(np.arccos(np.clip(cosine, -1.0, 1.0)))


def _refine(metric: MetricField, fan: RayFan, i: int, j: int, bounds: tuple[float, float]) -> tuple[float, float]:
    def distance(t: float) -> float:
        return _pair_distance(metric, fan, i, j, t)[0]

    lower, upper = bounds
    if upper - lower <= 0.0:
        return lower, distance(lower)
    result = minimize_scalar(distance, bounds=(lower, upper), method="bounded", options={"xatol": 1e-11 * max(1.0, abs(lower))})
    candidates = [(float(result.x), float(result.fun)), (lower, distance(lower)), (upper, distance(upper))]
    return min(candidates, key=lambda item: item[1])


def _level_spacing(levels: list[float], k: int) -> float:
    gaps = []
    if k > 0:
        gaps.append(abs(levels[k - 1] - levels[k]))
    if k + 1 < len(levels):
        gaps.append(abs(levels[k] - levels[k + 1]))
    return max(gaps) if gaps else abs(levels[k])


def detect_intersections(
    metric: MetricField,
    fan: RayFan,
    t_levels: list[float],
    match_factor: float = 5.0,
    match_tol: float | None = None,
    conjugate_table: dict[int, float] | None = None,
    stop_after_first: bool = False,
) -> tuple[list[IntersectionEventSchema], list[dict]]:
    """
    Find pairs of distinct rays that reach the same point of a slice.

    Slices are scanned from the vertex downwards. On each resolvable slice candidate pairs
    come from a spatial hash, the crossing time is refined by a bounded scalar minimization of
    the pair distance, and the pair is accepted when the minimum is below the match tolerance
    scaled to the refined time. Direct grid neighbours never pair.

    :return: Clustered events sorted from the vertex downwards, and per-slice diagnostics.
    """
    t_p = fan.base.t
    levels = sorted((t for t in t_levels if t < t_p), reverse=True)
    conjugate_table = conjugate_table or {}
    grid = fan.grid
    floor = ANGULAR_FLOOR * grid.spacing

    accepted: dict[tuple[int, int], Candidate] = {}
    diagnostics = []
    any_data = False
    any_resolved = False
    for k, t_level in enumerate(levels):
        snapshot = level_snapshot(metric, fan, t_level, match_factor)
        diagnostics.append(snapshot.diagnostics())
        if len(snapshot.points) < 4:
            continue
        any_data = True
        if not snapshot.resolvable:
            logger.warning(
                "Slice t = %.6g not resolvable: interpolation error %.3g vs neighbour distance %.3g.",
                t_level,
                snapshot.interpolation_error,
                snapshot.neighbor_distance,
            )
            continue
        any_resolved = True

        level_tol = match_tol if match_tol is not None else snapshot.match_tol
        dt = _level_spacing(levels, k)
        radius = level_tol + 1.25 * dt * snapshot.speed
        spatial_hash = SpatialHash(radius / snapshot.embed_scale, metric.embed_periods(fan.base.chart_id))
        pairs = spatial_hash.candidate_pairs(snapshot.embedded, radius / snapshot.embed_scale)

        found_here = False
        for i, j in sorted(pairs):
            if grid.angle(i, j) < floor:
                continue
            a, b = snapshot.points[i], snapshot.points[j]
            try:
                if metric.separation(t_level, a.x, a.chart_id, b.x, b.chart_id) > radius:
                    continue
                t_low = max(fan.rays[i].t_range[0], fan.rays[j].t_range[0], t_level - 0.5 * dt)
                t_high = min(t_p - 1e-12 * max(1.0, abs(t_p)), t_level + 0.5 * dt)
                t_star, d_star = _refine(metric, fan, i, j, (t_low, t_high))
            except (PointOutsideAtlasError, LevelOutOfRangeError, AtlasExitError):
                continue
            threshold = level_tol * abs(t_star - t_p) / abs(t_level - t_p)
            if d_star >= threshold:
                continue
            _, first, second = _pair_distance(metric, fan, i, j, t_star)
            candidate = Candidate(i=i, j=j, t=t_star, distance=d_star, level_tol=level_tol, first=first, second=second)
            previous = accepted.get((i, j))
            if previous is None or candidate.t > previous.t:
                accepted[(i, j)] = candidate
                found_here = True
        if stop_after_first and found_here:
            break

    if any_data and not any_resolved:
        raise ResolutionTooCoarseError(
            f"Grid level {grid.level} cannot resolve any slice (spacing {grid.spacing:.3g} rad)."
        )

    events = []
    for candidate in _cluster(metric, list(accepted.values())):
        candidate.angle = _safe_angle(metric, candidate)
        candidate.unresolved = grid.angle(candidate.i, candidate.j) < floor + UNRESOLVED_BAND * grid.spacing
        candidate.kind = _kind(candidate, conjugate_table)
        events.append(_to_schema(candidate))
    return events, diagnostics


def _safe_angle(metric: MetricField, candidate: Candidate) -> float:
    try:
        return crossing_angle(metric, candidate.first, candidate.second)
    except PointOutsideAtlasError:
        return float("nan")


def _kind(candidate: Candidate, conjugate_table: dict[int, float]) -> str:
    for index, point in ((candidate.i, candidate.first), (candidate.j, candidate.second)):
        zero = conjugate_table.get(index)
        if zero is not None and abs(point.s - zero) <= CONJUGATE_TOLERANCE * max(1.0, zero):
            return "conjugate"
    return "crossing"


def _cluster(metric: MetricField, candidates: list[Candidate]) -> list[Candidate]:
    """Merge events at the same time and place; the representative keeps the count."""
    ordered = sorted(candidates, key=lambda c: (-c.t, c.distance, c.i, c.j))
    clusters: list[Candidate] = []
    for candidate in ordered:
        for representative in clusters:
            if abs(candidate.t - representative.t) > CLUSTER_TIME_TOLERANCE * max(1.0, abs(representative.t)):
                continue
            try:
                gap = metric.separation(
                    representative.t,
                    representative.first.x,
                    representative.first.chart_id,
                    candidate.first.x,
                    candidate.first.chart_id,
                )
            except PointOutsideAtlasError:
                continue
            if gap <= max(representative.level_tol, candidate.level_tol):
                representative.multiplicity += 1
                break
        else:
            clusters.append(candidate)
    return clusters


def _to_schema(candidate: Candidate) -> IntersectionEventSchema:
    first = candidate.first
    return IntersectionEventSchema(
        t_event=candidate.t,
        q=PointSchema(t=candidate.t, x=[float(value) for value in first.x], chart_id=first.chart_id),
        omega1=candidate.i,
        omega2=candidate.j,
        s1=first.s,
        s2=candidate.second.s,
        angle_at_q=candidate.angle,
        windings=([int(w) for w in first.winding], [int(w) for w in candidate.second.winding]),
        distance=candidate.distance,
        kind=candidate.kind,
        unresolved=candidate.unresolved,
        multiplicity=candidate.multiplicity,
    )
