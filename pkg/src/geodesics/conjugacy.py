import logging
from concurrent.futures import Executor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from geodesics.fan import RayFan, trace_fan
from geodesics.grid import SphereGrid
from geodesics.integrator import DJ1, DJ2, E1, E2, J1, J2, NullGeodesic, integrate_geodesic
from metric import MetricField, SpacetimePoint
from schemas import Beyond, ConjugacyRow, RadiusValue, TolerancesSchema, radius_min


logger = logging.getLogger(__name__)

SUBSAMPLES = 4


def transverse_matrix(y: np.ndarray, g4: np.ndarray) -> np.ndarray:
    """A_cb = g(J_c, e_b): the Jacobi fields in the parallel transported transverse pair."""
    jacobi = np.stack([y[J1], y[J2]])
    frame = np.stack([y[E1], y[E2]])
    return jacobi @ g4 @ frame.T


def _spacetime_metric(metric: MetricField, y: np.ndarray, chart_id: str) -> np.ndarray:
    g4 = np.zeros((4, 4))
    g4[0, 0] = -float(metric.lapse(y[0], y[1:4], chart_id)) ** 2
    g4[1:, 1:] = metric.spatial_metric(y[0], y[1:4], chart_id)
    return g4


@dataclass
class JacobiState:
    """Two Jacobi fields along one ray, vanishing at the vertex with unit transverse derivatives."""

    metric: MetricField
    along: NullGeodesic

    def fields(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        y, _ = self.along.state(s)
        return np.stack([y[J1], y[J2]]), np.stack([y[DJ1], y[DJ2]])

    def matrix(self, s: float) -> np.ndarray:
        y, chart_id = self.along.state(s)
        return transverse_matrix(y, _spacetime_metric(self.metric, y, chart_id))

    def transverse_det(self, s: float) -> float:
        return float(np.linalg.det(self.matrix(s)))

    def first_zero(self) -> float | None:
        """Smallest s > 0 where det A changes sign, refined with brentq; None if none up to the ray's end."""
        s_steps, _, _ = self.along.steps()
        nodes = [0.0]
        for a, b in zip(s_steps[:-1], s_steps[1:]):
            nodes.extend(np.linspace(a, b, SUBSAMPLES + 1)[1:])
        nodes = np.unique(np.asarray(nodes))
        nodes = nodes[nodes > 0.0]
        previous_s, previous_det = None, None
        for s in nodes:
            det = self.transverse_det(s)
            if previous_det is not None and previous_det > 0.0 and det <= 0.0:
                if det == 0.0:
                    return float(s)
                return float(brentq(self.transverse_det, previous_s, s, xtol=1e-13))
            previous_s, previous_det = s, det
        return None


def jacobi_propagate(
    metric: MetricField,
    geodesic: NullGeodesic,
    tolerances: TolerancesSchema | None = None,
) -> JacobiState:
    """Jacobi data along a ray, re-integrating with the extended state when the ray lacks it."""
    if not geodesic.extended:
        geodesic = integrate_geodesic(
            metric,
            geodesic.base,
            geodesic.omega,
            geodesic.s_end,
            tolerances or TolerancesSchema(),
            extended=True,
            omega_index=geodesic.omega_index,
        )
    return JacobiState(metric=metric, along=geodesic)


def conjugacy_radius(
    metric: MetricField,
    p: SpacetimePoint,
    grid: SphereGrid,
    s_max: float,
    tolerances: TolerancesSchema,
    fan: RayFan | None = None,
    executor: Executor | None = None,
) -> tuple[RadiusValue, list[ConjugacyRow], list[int]]:
    """
    Minimum over the grid of the first conjugate parameter.

    :return: s* (or Beyond(s_max)), one row per direction, and the excluded (failed) rays.
    """
    if fan is None or not fan.extended:
        fan = trace_fan(metric, p, grid, s_max, tolerances, extended=True, executor=executor)
    rows = []
    for i, ray in enumerate(fan.rays):
        if ray is None:
            continue
        zero = JacobiState(metric=metric, along=ray).first_zero()
        rows.append(ConjugacyRow(omega_index=i, first_zero=zero if zero is not None else Beyond(beyond=ray.s_end)))
    s_star = radius_min(*(row.first_zero for row in rows)) if rows else Beyond(beyond=s_max)
    logger.info("Conjugacy radius from %s: %s", p, s_star)
    return s_star, rows, sorted(fan.failures)
