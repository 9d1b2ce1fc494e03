import itertools
import logging
from concurrent.futures import Executor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from config import get_worker_pool
from energy.slices import SliceGrid, slice_grid
from exceptions import BallExitsChartError
from geodesics import SphereGrid, icosphere, terminal_event
from metric import MetricField, orthonormal_triad
from metric.sampling import christoffel, christoffel_derivative
from schemas import Beyond, RadiusValue, TolerancesSchema, VolumeLadderRow, VolumeRadiusPoint, VolumeRadiusReport


logger = logging.getLogger(__name__)

# slots of the slice shooting state
X = slice(0, 3)
V = slice(3, 6)
J1, DJ1 = slice(6, 9), slice(9, 12)
J2, DJ2 = slice(12, 15), slice(15, 18)
VOLUME = 18
SHOOT_SIZE = 19

OCTAVES = 6
CUT_SAMPLES = 64
BOX_MARGIN = 1.5
GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(4)


class SliceGeodesicSystem:
    """
    Riemannian geodesics of one slice with two Jacobi fields and the polar volume density.

    d VOLUME / ds = sqrt(det g) |det(v, J1, J2)|, so VOLUME(r) integrated over unit directions is
    the volume of the geodesic ball while r stays below the cut radius.
    """

    def __init__(self, metric: MetricField, t_level: float, chart_id: str):
        self.metric = metric
        self.t_level = t_level
        self.chart_id = chart_id

    def connection(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        jet = self.metric.jet(self.t_level, x, self.chart_id)
        g_inv = np.linalg.inv(jet.g)
        dg, ddg = jet.dg[1:], jet.ddg[1:, 1:]
        return jet.g, christoffel(g_inv, dg), christoffel_derivative(g_inv, dg, ddg)

    def __call__(self, s: float, y: np.ndarray) -> np.ndarray:
        g, gamma, d_gamma = self.connection(y[X])
        v = y[V]
        dy = np.zeros_like(y)
        dy[X] = v
        dy[V] = -np.einsum("abc,b,c->a", gamma, v, v)
        for j, dj in ((J1, DJ1), (J2, DJ2)):
            dy[j] = y[dj]
            dy[dj] = -np.einsum("mabc,m,b,c->a", d_gamma, y[j], v, v) - 2.0 * np.einsum("abc,b,c->a", gamma, v, y[dj])
        dy[VOLUME] = np.sqrt(np.linalg.det(g)) * abs(np.linalg.det(np.stack([v, y[J1], y[J2]])))
        return dy


@dataclass
class SliceRay:
    omega_index: int
    solution: object
    s_end: float

    def state(self, s: float) -> np.ndarray:
        return self.solution(s)

    def volume(self, r: float) -> float:
        return float(self.solution(min(r, self.s_end))[VOLUME])


def _exit_events(metric: MetricField, chart_id: str) -> list:
    chart = metric.chart(chart_id)
    events = []
    for axis in range(3):
        if chart.is_periodic(axis):
            continue
        if np.isfinite(chart.lower[axis]):
            events.append(terminal_event(lambda s, y, a=axis, b=chart.lower[axis]: y[a] - b))
        if np.isfinite(chart.upper[axis]):
            events.append(terminal_event(lambda s, y, a=axis, b=chart.upper[axis]: b - y[a]))
    events.extend(terminal_event(lambda s, y, f=f: f(y[X])) for f in metric.chart_events(chart_id))
    return events


def shoot(
    metric: MetricField,
    t_level: float,
    x0: np.ndarray,
    chart_id: str,
    omega: np.ndarray,
    tangent: np.ndarray,
    s_end: float,
    tolerances: TolerancesSchema,
    omega_index: int = 0,
) -> SliceRay:
    """Unit-speed slice geodesic from x0; raises BallExitsChartError if it leaves the chart before s_end."""
    triad = orthonormal_triad(metric.spatial_metric(t_level, x0, chart_id))
    y0 = np.zeros(SHOOT_SIZE)
    y0[X] = x0
    y0[V] = triad @ omega
    y0[DJ1] = triad @ tangent[0]
    y0[DJ2] = triad @ tangent[1]
    solution = solve_ivp(
        SliceGeodesicSystem(metric, t_level, chart_id),
        (0.0, s_end),
        y0,
        method=tolerances.method,
        rtol=tolerances.rtol,
        atol=tolerances.atol,
        dense_output=True,
        events=_exit_events(metric, chart_id) or None,
    )
    if solution.status == 1:
        raise BallExitsChartError(
            f"Slice geodesic {omega_index} from {list(x0)} leaves chart '{chart_id}' at s = {solution.t[-1]:.6g}."
        )
    return SliceRay(omega_index=omega_index, solution=solution.sol, s_end=float(solution.t[-1]))


def _lift_shifts(metric: MetricField, chart_id: str) -> np.ndarray:
    periods = metric.chart(chart_id).periods
    choices = [(-period, 0.0, period) if period is not None else (0.0,) for period in periods]
    return np.array(list(itertools.product(*choices)))


def straight_lift_length(metric: MetricField, t_level: float, chart_id: str, x0: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """
    Shortest g-length of coordinate segments from x0 to the periodic lifts of each target.

    Segment lengths are upper bounds of the distance; Gauss-Legendre along each segment.
    """
    chart = metric.chart(chart_id)
    targets = np.asarray(targets, dtype=float).reshape(-1, 3)
    base = chart.minimal_image(targets - x0)
    deltas = base[:, None, :] + _lift_shifts(metric, chart_id)[None, :, :]
    fractions = 0.5 * (GAUSS_NODES + 1.0)
    points = x0 + fractions[None, None, :, None] * deltas[:, :, None, :]
    g = metric.spatial_metric(t_level, points.reshape(-1, 3), chart_id).reshape(points.shape + (3,))
    speed = np.sqrt(np.einsum("nli,nlgij,nlj->nlg", deltas, g, deltas))
    lengths = 0.5 * speed @ GAUSS_WEIGHTS
    return lengths.min(axis=1)


def cut_radius(metric: MetricField, t_level: float, x0: np.ndarray, chart_id: str, ray: SliceRay) -> float | None:
    """
    First s where the shot stops minimizing: a conjugate point (det(v, J1, J2) vanishes) or a
    periodic lift reached by a shorter straight segment.
    """

    def conjugate(s: float) -> float:
        y = ray.state(s)
        return float(np.linalg.det(np.stack([y[V], y[J1], y[J2]])))

    def gap(s: float) -> float:
        x = ray.state(s)[X]
        return float(straight_lift_length(metric, t_level, chart_id, x0, x[None, :])[0]) - s * (1.0 - 1e-9)

    samples = np.linspace(0.0, ray.s_end, CUT_SAMPLES + 1)[1:]
    previous = samples[0] * 1e-3
    for s in samples:
        candidates = []
        for criterion in (conjugate, gap):
            if criterion(s) < 0.0:
                candidates.append(brentq(criterion, previous, s, xtol=1e-10) if criterion(previous) > 0.0 else s)
        if candidates:
            return float(min(candidates))
        previous = s
    return None


def radius_ladder(scale: float, rho: float, radii_per_octave: int) -> np.ndarray:
    """r_j = scale 2^(j / m) between scale 2^-OCTAVES and rho; shared by every rho."""
    lowest = -OCTAVES * radii_per_octave
    highest = int(np.floor(radii_per_octave * np.log2(rho / scale) + 1e-9))
    if highest < lowest:
        return np.array([rho])
    return scale * 2.0 ** (np.arange(lowest, highest + 1) / radii_per_octave)


def _counting_grid(metric: MetricField, t_level: float, x0: np.ndarray, chart_id: str, rho: float, resolution: int) -> SliceGrid:
    chart = metric.chart(chart_id)
    g0 = metric.spatial_metric(t_level, x0, chart_id)
    half_width = BOX_MARGIN * rho / np.sqrt(np.linalg.eigvalsh(g0).min())
    box = []
    for axis in range(3):
        lower, upper = x0[axis] - half_width, x0[axis] + half_width
        if not chart.is_periodic(axis) and (lower < chart.lower[axis] or upper > chart.upper[axis]):
            raise BallExitsChartError(f"The ball of radius {rho} around {list(x0)} leaves chart '{chart_id}'.")
        box.append([lower, upper])
    return slice_grid(metric, t_level, resolution, box, chart_id)


def graph_distances(metric: MetricField, grid: SliceGrid, x0: np.ndarray) -> np.ndarray:
    """
    Distances from x0 to every node: Dijkstra on the 26-neighbour node graph, capped by straight
    segments over periodic lifts.
    """
    shape = grid.shape
    count = len(grid.nodes)
    index = np.arange(count).reshape(shape)
    rows, cols, weights = [], [], []
    for offset in itertools.product((-1, 0, 1), repeat=3):
        if offset <= (0, 0, 0):
            continue
        source, target = index, index
        for axis, step in enumerate(offset):
            if step == 0:
                continue
            if grid.periodic[axis]:
                target = np.roll(target, -step, axis=axis)
            else:
                keep = [slice(None)] * 3
                drop = [slice(None)] * 3
                keep[axis] = slice(0, shape[axis] - step) if step > 0 else slice(-step, None)
                drop[axis] = slice(step, None) if step > 0 else slice(0, shape[axis] + step)
                source, target = source[tuple(keep)], target[tuple(drop)]
        source, target = source.ravel(), target.ravel()
        delta = np.array(offset) * grid.spacing
        midpoints = grid.nodes[source] + 0.5 * delta
        g = metric.spatial_metric(grid.t_level, midpoints, grid.chart_id)
        rows.append(source)
        cols.append(target)
        weights.append(np.sqrt(np.einsum("i,nij,j->n", delta, g, delta)))

    # the base point joins the graph through the nodes of its surrounding cells
    chart = metric.chart(grid.chart_id)
    offsets = chart.minimal_image(grid.nodes - x0)
    near = np.flatnonzero(np.all(np.abs(offsets) <= 1.5 * grid.spacing, axis=1))
    direct = straight_lift_length(metric, grid.t_level, grid.chart_id, x0, grid.nodes[near])
    rows.append(np.full(len(near), count))
    cols.append(near)
    weights.append(direct)

    graph = coo_matrix(
        (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))), shape=(count + 1, count + 1)
    ).tocsr()
    distances = dijkstra(graph, directed=False, indices=count)[:count]
    return np.minimum(distances, straight_lift_length(metric, grid.t_level, grid.chart_id, x0, grid.nodes))


def counted_volume(grid: SliceGrid, distances: np.ndarray, r: float) -> float:
    """Volume of {d <= r}, each cell entering linearly across its own width."""
    width = np.cbrt(grid.dv_weights)
    inside = np.clip(0.5 + (r - distances) / width, 0.0, 1.0)
    return float(grid.dv_weights @ inside)


def _point_task(task: tuple) -> VolumeRadiusPoint:
    metric, t_level, x0, chart_id, rho, grid, resolution, radii_per_octave, tolerances = task
    x0 = np.asarray(x0, dtype=float)
    ladder = radius_ladder(metric.chart(chart_id).scale, rho, radii_per_octave)
    s_end = float(ladder[-1])
    rays = [
        shoot(metric, t_level, x0, chart_id, grid.vertices[i], grid.tangents[i], s_end, tolerances, omega_index=i)
        for i in range(len(grid))
    ]
    cuts = [cut_radius(metric, t_level, x0, chart_id, ray) for ray in rays]
    finite_cuts = [cut for cut in cuts if cut is not None]
    min_cut: RadiusValue = min(finite_cuts) if finite_cuts else Beyond(beyond=s_end)

    distances = None
    rows = []
    for r in ladder:
        if isinstance(min_cut, Beyond) or r < min_cut:
            volume = float(sum(w * ray.volume(r) for w, ray in zip(grid.areas, rays)))
            method = "polar"
        else:
            if distances is None:
                counting = _counting_grid(metric, t_level, x0, chart_id, rho, resolution)
                distances = graph_distances(metric, counting, x0)
            volume = counted_volume(counting, distances, r)
            method = "counting"
        rows.append(VolumeLadderRow(r=float(r), volume=volume, ratio=volume / r**3, method=method))

    best = min(rows, key=lambda row: row.ratio)
    return VolumeRadiusPoint(point=list(x0), r_vol=best.ratio, argmin_r=best.r, min_cut_radius=min_cut, ladder=rows)


def volume_radius(
    metric: MetricField,
    t_level: float,
    points: list[list[float]],
    rho: float,
    tolerances: TolerancesSchema,
    chart_id: str = "main",
    grid: SphereGrid | None = None,
    resolution: int = 24,
    radii_per_octave: int = 4,
    executor: Executor | None = None,
) -> VolumeRadiusReport:
    """
    r_vol(p, rho) = inf over r <= rho of |B_r(p)| / r^3 for every point, and the infimum over the points.

    Balls below every direction's cut radius come from polar shooting; larger balls from the
    distance sub-level set on a slice grid.
    """
    grid = grid or icosphere(2)
    executor = executor or get_worker_pool()
    tasks = [
        (metric, t_level, point, chart_id, rho, grid, resolution, radii_per_octave, tolerances) for point in points
    ]
    rows = list(executor.map(_point_task, tasks))
    for row in rows:
        logger.info("Volume radius at %s: %.6g (r = %.4g).", row.point, row.r_vol, row.argmin_r)
    return VolumeRadiusReport(
        t_level=t_level,
        rho=rho,
        points=rows,
        slice_infimum=min(row.r_vol for row in rows),
    )
