import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from metric.interfaces import MetricField
from metric.norms import adapted_frame, frame_components
from metric.sampling import deformation_from_sample, sample_batch
from schemas import AssumptionBudgetSchema, BudgetAuditReport


logger = logging.getLogger(__name__)

REFINE_STARTS = 3
REFINE_MAXITER = 60


@dataclass
class AuditGrid:
    """
    Spacetime sample points of one chart: times (N,) and spatial coordinates (N, 3).

    bounds, shape (4, 2), is the (t, x1, x2, x3) box the nodes span; when present the
    sups are refined by a bounded local maximization from the best nodes.
    """

    t: np.ndarray
    x: np.ndarray
    chart_id: str = "main"
    bounds: np.ndarray | None = None

    @classmethod
    def product(cls, t_values, spatial_nodes, chart_id: str = "main", bounds=None) -> "AuditGrid":
        t_values = np.asarray(t_values, dtype=float)
        spatial_nodes = np.asarray(spatial_nodes, dtype=float).reshape(-1, 3)
        t = np.repeat(t_values, len(spatial_nodes))
        x = np.tile(spatial_nodes, (len(t_values), 1))
        if bounds is not None:
            bounds = np.asarray(bounds, dtype=float).reshape(4, 2)
        return cls(t=t, x=x, chart_id=chart_id, bounds=bounds)


def equivalence_constant(g: np.ndarray) -> tuple[float, float, float]:
    """Smallest C with C^-1 |xi|^2 <= g(xi, xi) <= C |xi|^2 over the batch, plus the eigenvalue range."""
    eigenvalues = np.linalg.eigvalsh(g)
    lambda_min = float(eigenvalues.min())
    lambda_max = float(eigenvalues.max())
    return max(lambda_max, 1.0 / lambda_min), lambda_min, lambda_max


def curvature_norm(riemann: np.ndarray, n: np.ndarray, g: np.ndarray) -> np.ndarray:
    """|R| with one eighth of the squared orthonormal-frame components, so that |R|^2 = |E|^2 + |H|^2 for Weyl fields."""
    components = frame_components(riemann, adapted_frame(n, g))
    return np.sqrt(np.sum(components**2, axis=(-4, -3, -2, -1)) / 8.0)


def refine_sup(
    objective: Callable[[np.ndarray], float],
    node_values: np.ndarray,
    grid: AuditGrid,
    starts: int = REFINE_STARTS,
) -> float:
    """
    Raise a grid sup by maximizing objective(z), z = (t, x), inside grid.bounds from the best nodes.

    Returns the grid sup unchanged when the grid carries no bounds.
    """
    best = float(np.max(node_values))
    if grid.bounds is None:
        return best
    order = np.argsort(node_values)[::-1][:starts]
    for index in order:
        z0 = np.concatenate([[grid.t[index]], grid.x[index]])
        try:
            result = minimize(
                lambda z: -objective(z),
                z0,
                method="L-BFGS-B",
                bounds=[tuple(row) for row in grid.bounds],
                options={"maxiter": REFINE_MAXITER},
            )
        except (ValueError, FloatingPointError) as e:
            logger.debug("Sup refinement from node %d stopped: %s", index, e)
            continue
        if np.isfinite(result.fun):
            best = max(best, float(-result.fun))
    return best


def budget_audit(metric: MetricField, budget: AssumptionBudgetSchema, grid: AuditGrid) -> BudgetAuditReport:
    """
    Compare the declared budget with empirical sups over the sample grid.

    Never mutates the budget; failing entries are reported and logged.
    """
    s = sample_batch(metric, grid.t, grid.x, grid.chart_id)
    deformation = deformation_from_sample(s)
    t_min, t_max = metric.interval
    interval_length = t_max - t_min
    chart_id = grid.chart_id

    def lapse_at(z: np.ndarray) -> float:
        return float(metric.lapse(z[0], z[1:], chart_id))

    def deformation_at(z: np.ndarray) -> float:
        point = sample_batch(metric, np.array([z[0]]), z[None, 1:], chart_id)
        return float(deformation_from_sample(point).pointwise_norm[0])

    sup_lapse = refine_sup(lapse_at, s.n, grid)
    sup_inverse_lapse = refine_sup(lambda z: 1.0 / lapse_at(z), 1.0 / s.n, grid)
    sup_deformation = refine_sup(deformation_at, deformation.pointwise_norm, grid)
    sup_curvature = float(np.max(curvature_norm(s.riemann, s.n, s.g)))

    initial = np.unique(grid.x, axis=0)
    initial_constant, _, _ = equivalence_constant(metric.spatial_metric(t_min, initial, grid.chart_id))

    checks = {
        "lapse_upper": sup_lapse <= budget.N0,
        "lapse_lower": sup_inverse_lapse <= budget.N0,
        "deformation": interval_length * sup_deformation <= budget.K0,
        "initial_equivalence": initial_constant <= budget.I0,
    }
    for name, ok in checks.items():
        if not ok:
            logger.warning("Budget check '%s' failed for %s.", name, metric.family)

    return BudgetAuditReport(
        sup_lapse=sup_lapse,
        sup_inverse_lapse=sup_inverse_lapse,
        sup_deformation=sup_deformation,
        interval_length=interval_length,
        deformation_times_interval=interval_length * sup_deformation,
        initial_equivalence=initial_constant,
        sup_curvature=sup_curvature,
        checks=checks,
        passed=all(checks.values()),
    )
