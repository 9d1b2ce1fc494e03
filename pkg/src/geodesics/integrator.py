import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from exceptions import AtlasExitError, LevelOutOfRangeError, StepUnderflowError
from frames import initial_null_vector
from geodesics.grid import tangent_basis
from metric import MetricField, SpacetimePoint, connection, normal_covariant_derivative, orthonormal_triad
from schemas import TolerancesSchema


logger = logging.getLogger(__name__)

# slots of the extended ray state
X = slice(0, 4)
V = slice(4, 8)
J1, DJ1 = slice(8, 12), slice(12, 16)
J2, DJ2 = slice(16, 20), slice(20, 24)
E1, E2 = slice(24, 28), slice(28, 32)
PHI = 32
PSI = slice(33, 35)
BASIC_SIZE = 8
EXTENDED_SIZE = 35
MAX_CHART_SWITCHES = 1000


class RaySystem:
    """
    Right-hand side of the null geodesic equation in one chart.

    The extended system also carries two Jacobi fields with their derivatives, a parallel
    transported pair e1, e2, and the transported foliation scalars phi and g(e_a, T).
    """

    def __init__(self, metric: MetricField, chart_id: str, extended: bool = False):
        self.metric = metric
        self.chart_id = chart_id
        self.extended = extended

    def __call__(self, s: float, y: np.ndarray) -> np.ndarray:
        x, v = y[X], y[V]
        jet, _, gamma, d_gamma = connection(self.metric, x[0], x[1:], self.chart_id, self.extended)
        dy = np.zeros_like(y)
        dy[X] = v
        dy[V] = -np.einsum("abc,b,c->a", gamma, v, v)
        if not self.extended:
            return dy

        for j, dj in ((J1, DJ1), (J2, DJ2)):
            dy[j] = y[dj]
            dy[dj] = (
                -np.einsum("mabc,m,b,c->a", d_gamma, y[j], v, v)
                - 2.0 * np.einsum("abc,b,c->a", gamma, v, y[dj])
            )
        for e in (E1, E2):
            dy[e] = -np.einsum("abc,b,c->a", gamma, v, y[e])

        dt = normal_covariant_derivative(jet.n, jet.dn, gamma)
        pi_ll = 2.0 * (v @ dt @ v)
        dy[PHI] = -0.5 * y[PHI] ** 2 * pi_ll
        dy[PSI] = [v @ dt @ y[E1], v @ dt @ y[E2]]
        return dy


@dataclass
class Segment:
    chart_id: str
    s_start: float
    s_end: float
    solution: object
    s_steps: np.ndarray
    y_steps: np.ndarray

    def __call__(self, s: float) -> np.ndarray:
        return self.solution(s)


@dataclass
class RayLevelPoint:
    s: float
    t: float
    x: np.ndarray
    chart_id: str
    winding: np.ndarray
    velocity: np.ndarray
    state: np.ndarray


@dataclass
class NullGeodesic:
    base: SpacetimePoint
    omega: np.ndarray
    segments: list[Segment]
    termination: str
    extended: bool
    omega_index: int | None = None
    null_residual_max: float = 0.0
    killing_residual_max: float | None = None
    metric_family: str = ""

    @property
    def s_end(self) -> float:
        return self.segments[-1].s_end

    @property
    def t_range(self) -> tuple[float, float]:
        return float(self.segments[-1].y_steps[-1, 0]), float(self.segments[0].y_steps[0, 0])

    def segment_at(self, s: float) -> Segment:
        if s < 0.0 or s > self.s_end + 1e-12:
            raise AtlasExitError(self.s_end, f"Ray {self.omega_index} ends at s = {self.s_end:.6g}, before s = {s:.6g}.")
        for segment in self.segments:
            if s <= segment.s_end:
                return segment
        return self.segments[-1]

    def state(self, s: float) -> tuple[np.ndarray, str]:
        segment = self.segment_at(s)
        return segment(min(max(s, segment.s_start), segment.s_end)), segment.chart_id

    def level_point(self, s: float, chart) -> RayLevelPoint:
        y, chart_id = self.state(s)
        wrapped, winding = chart(chart_id).wrap(y[1:4])
        return RayLevelPoint(s=float(s), t=float(y[0]), x=wrapped, chart_id=chart_id, winding=winding, velocity=y[V].copy(), state=y)

    def steps(self) -> tuple[np.ndarray, np.ndarray, list[str]]:
        """Accepted solver steps over all segments: s values, states and chart ids."""
        s_values = np.concatenate([segment.s_steps for segment in self.segments])
        states = np.concatenate([segment.y_steps for segment in self.segments])
        charts = [segment.chart_id for segment in self.segments for _ in segment.s_steps]
        return s_values, states, charts


def solver_options(tolerances: TolerancesSchema, span: float) -> dict:
    if tolerances.fixed_step is not None:
        step = min(tolerances.fixed_step, span)
        return {"method": tolerances.method, "first_step": step, "max_step": step, "rtol": 1e3, "atol": 1e3}
    return {"method": tolerances.method, "rtol": tolerances.rtol, "atol": tolerances.atol}


def terminal_event(function, terminal: bool = True, direction: float = -1.0):
    function.terminal = terminal
    function.direction = direction
    return function


def _chart_exit_events(metric: MetricField, chart_id: str) -> list:
    chart = metric.chart(chart_id)
    events = []
    for axis in range(3):
        if chart.is_periodic(axis):
            continue
        lower, upper = chart.lower[axis], chart.upper[axis]
        if np.isfinite(lower):
            events.append(terminal_event(lambda s, y, a=axis, b=lower: y[1 + a] - b))
        if np.isfinite(upper):
            events.append(terminal_event(lambda s, y, a=axis, b=upper: b - y[1 + a]))
    return events


def transition_state(metric: MetricField, chart_id: str, y: np.ndarray, extended: bool) -> tuple[str, np.ndarray]:
    """Express a ray state in the neighbouring chart; Jacobi derivatives go through D J = J' + Gamma(v, J)."""
    new_chart, new_x, jacobian = metric.transition(chart_id, y[1:4])
    lift = np.eye(4)
    lift[1:, 1:] = jacobian
    z = y.copy()
    z[1:4] = new_x
    z[V] = lift @ y[V]
    if not extended:
        return new_chart, z

    _, _, gamma_old, _ = connection(metric, y[0], y[1:4], chart_id)
    _, _, gamma_new, _ = connection(metric, z[0], z[1:4], new_chart)
    for j, dj in ((J1, DJ1), (J2, DJ2)):
        covariant = y[dj] + np.einsum("abc,b,c->a", gamma_old, y[V], y[j])
        z[j] = lift @ y[j]
        z[dj] = lift @ covariant - np.einsum("abc,b,c->a", gamma_new, z[V], z[j])
    for e in (E1, E2):
        z[e] = lift @ y[e]
    return new_chart, z


def initial_state(metric: MetricField, p: SpacetimePoint, omega: np.ndarray, tangent: np.ndarray | None, extended: bool) -> np.ndarray:
    ell = initial_null_vector(metric, p, omega)
    y = np.zeros(EXTENDED_SIZE if extended else BASIC_SIZE)
    y[X] = p.as_array()
    y[V] = ell
    if extended:
        triad = orthonormal_triad(metric.spatial_metric(p.t, np.asarray(p.x), p.chart_id))
        for a, (dj, e) in enumerate(((DJ1, E1), (DJ2, E2))):
            vector = np.concatenate([[0.0], triad @ tangent[a]])
            y[dj] = vector
            y[e] = vector
        y[PHI] = 1.0
    return y


def integrate_geodesic(
    metric: MetricField,
    p: SpacetimePoint,
    omega,
    s_max: float,
    tolerances: TolerancesSchema,
    extended: bool = False,
    t_stop: float | None = None,
    tangent: np.ndarray | None = None,
    omega_index: int | None = None,
    strict: bool = False,
) -> NullGeodesic:
    """
    Integrate the past null geodesic from p with initial direction omega.

    Integration stops at s_max, when t reaches t_stop (default: the start of the metric's
    interval), or when the ray leaves the atlas. The last case is flagged on the result and
    raises AtlasExitError only when strict is set.
    """
    metric.locate(p)
    omega = np.asarray(omega, dtype=float)
    if extended and tangent is None:
        tangent = tangent_basis(omega)
    y = initial_state(metric, p, omega, tangent, extended)
    t_stop = metric.interval[0] if t_stop is None else t_stop

    chart_id = p.chart_id
    s_start = 0.0
    segments: list[Segment] = []
    termination = "s_max"
    for _ in range(MAX_CHART_SWITCHES):
        time_events = [terminal_event(lambda s, y: y[0] - t_stop)] if t_stop < y[0] else []
        exit_events = _chart_exit_events(metric, chart_id)
        switch_events = [terminal_event(lambda s, y, f=f: f(y[1:4])) for f in metric.chart_events(chart_id)]
        events = time_events + exit_events + switch_events
        solution = solve_ivp(
            RaySystem(metric, chart_id, extended),
            (s_start, s_max),
            y,
            dense_output=True,
            events=events or None,
            **solver_options(tolerances, s_max - s_start),
        )
        if solution.status == -1:
            raise StepUnderflowError(f"Ray {omega_index}: {solution.message}")
        segments.append(
            Segment(
                chart_id=chart_id,
                s_start=float(solution.t[0]),
                s_end=float(solution.t[-1]),
                solution=solution.sol,
                s_steps=solution.t.copy(),
                y_steps=solution.y.T.copy(),
            )
        )
        if solution.status == 0:
            break

        fired = [i for i, hits in enumerate(solution.t_events) if len(hits)]
        first = fired[0]
        if first < len(time_events):
            termination = "t_min"
            break
        if first < len(time_events) + len(exit_events):
            termination = "atlas_exit"
            if strict:
                raise AtlasExitError(float(solution.t[-1]))
            logger.info("Ray %s left chart '%s' at s = %.6g.", omega_index, chart_id, solution.t[-1])
            break
        chart_id, y = transition_state(metric, chart_id, solution.y[:, -1], extended)
        s_start = float(solution.t[-1])
        if s_start >= s_max:
            break
    else:
        raise StepUnderflowError(f"Ray {omega_index} switched charts more than {MAX_CHART_SWITCHES} times.")

    geodesic = NullGeodesic(
        base=p,
        omega=omega,
        segments=segments,
        termination=termination,
        extended=extended,
        omega_index=omega_index,
        metric_family=metric.family,
    )
    geodesic.null_residual_max, geodesic.killing_residual_max = ray_residuals(metric, geodesic)
    if geodesic.null_residual_max > tolerances.null_tol:
        logger.warning("Ray %s null residual %.3g exceeds %.3g.", omega_index, geodesic.null_residual_max, tolerances.null_tol)
    return geodesic


def ray_residuals(metric: MetricField, geodesic: NullGeodesic) -> tuple[float, float | None]:
    """Max |g(v, v)| over accepted steps and, for static metrics, the drift of g(v, d_t)."""
    null_max = 0.0
    energies = []
    for segment in geodesic.segments:
        t, x, v = segment.y_steps[:, 0], segment.y_steps[:, 1:4], segment.y_steps[:, 4:8]
        n = metric.lapse(t, x, segment.chart_id)
        g = metric.spatial_metric(t, x, segment.chart_id)
        norm = -(n**2) * v[:, 0] ** 2 + np.einsum("si,sij,sj->s", v[:, 1:], g, v[:, 1:])
        null_max = max(null_max, float(np.max(np.abs(norm))))
        energies.append(-(n**2) * v[:, 0])
    if not metric.static:
        return null_max, None
    energy = np.concatenate(energies)
    return null_max, float(np.max(np.abs(energy - energy[0])))


def reparametrize(geodesic: NullGeodesic, t_level: float, chart) -> RayLevelPoint:
    """
    The point where the ray crosses the slice t = t_level.

    :param chart: Callable returning the ChartDescriptor of a chart id (metric.chart).
    """
    t_low, t_high = geodesic.t_range
    if t_level > t_high or t_level < t_low:
        raise LevelOutOfRangeError(
            f"t = {t_level:.6g} is outside [{t_low:.6g}, {t_high:.6g}] covered by ray {geodesic.omega_index}."
        )
    if t_level == t_high:
        return geodesic.level_point(0.0, chart)
    for segment in geodesic.segments:
        times = segment.y_steps[:, 0]
        if not times[-1] <= t_level <= times[0]:
            continue
        # times decrease along the ray
        k = int(np.searchsorted(-times, -t_level))
        k = min(max(k, 1), len(times) - 1)
        a, b = segment.s_steps[k - 1], segment.s_steps[k]
        f_a = segment(a)[0] - t_level
        f_b = segment(b)[0] - t_level
        if f_a == 0.0:
            return geodesic.level_point(a, chart)
        if f_b == 0.0 or f_a * f_b > 0.0:
            return geodesic.level_point(b, chart)
        s = brentq(lambda s: segment(s)[0] - t_level, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        return geodesic.level_point(s, chart)
    raise LevelOutOfRangeError(f"t = {t_level:.6g} not bracketed by ray {geodesic.omega_index}.")
