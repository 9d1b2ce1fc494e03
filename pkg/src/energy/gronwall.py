import logging
from concurrent.futures import Executor

import numpy as np

from energy.slices import slice_densities, slice_grid
from metric import MetricField, equivalence_constant, sample_batch, spatial_norm
from schemas import AssumptionBudgetSchema, EnergyReportSchema, EnergyRow, ErrorBarSchema, MetricEquivalenceReport


logger = logging.getLogger(__name__)

RELATIVE_SLACK = 1e-9


def _running_integral(t_values: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid integral from the first level."""
    steps = 0.5 * (values[1:] + values[:-1]) * np.diff(t_values)
    return np.concatenate([[0.0], np.cumsum(steps)])


def gronwall_check(
    metric: MetricField,
    budget: AssumptionBudgetSchema,
    t_range: list[float],
    resolution: int,
    cutoff_box: list[list[float]] | None = None,
    structural_constant: float = 6.0,
    chart_id: str = "main",
    executor: Executor | None = None,
    with_error_bars: bool = True,
) -> EnergyReportSchema:
    """
    Compare Q(t) with Q(t0) exp(c N0 integral of |pi|_inf) along the slice ladder.

    The empirical constant is the smallest c for which the inequality holds at every level.
    """
    t_values = np.asarray(t_range, dtype=float)
    energies, l2_norms, pi_sups = [], [], []
    for t in t_values:
        grid = slice_grid(metric, float(t), resolution, cutoff_box, chart_id)
        densities = slice_densities(metric, grid, executor)
        energies.append(float(grid.dv_weights @ densities.energy))
        l2_norms.append(float(np.sqrt(grid.dv_weights @ densities.curvature_squared)))
        pi_sups.append(float(np.max(densities.deformation)))
    energies = np.array(energies)
    pi_sups = np.array(pi_sups)
    pi_integral = _running_integral(t_values, pi_sups)

    q0 = energies[0]
    bounds = q0 * np.exp(structural_constant * budget.N0 * pi_integral)
    holds = bool(np.all(energies <= bounds * (1.0 + RELATIVE_SLACK) + RELATIVE_SLACK * max(q0, 1e-300)))

    empirical = 0.0
    for q, integral in zip(energies[1:], pi_integral[1:]):
        if q0 > 0.0 and q > q0 and integral > 0.0:
            empirical = max(empirical, float(np.log(q / q0) / (budget.N0 * integral)))
        elif q0 > 0.0 and q > q0 * (1.0 + RELATIVE_SLACK):
            empirical = float("inf")
    if not holds:
        logger.warning("Energy exceeds the Gronwall bound with c = %.3g for %s.", structural_constant, metric.family)

    error_bars: dict[str, ErrorBarSchema] = {}
    if with_error_bars and resolution >= 4:
        coarse = gronwall_check(
            metric,
            budget,
            t_range,
            resolution // 2,
            cutoff_box,
            structural_constant,
            chart_id,
            executor,
            with_error_bars=False,
        )
        fine_value = float(energies[-1])
        coarse_value = coarse.ladder[-1].Q
        error_bars["Q"] = ErrorBarSchema(value=fine_value, coarse_value=coarse_value, error=abs(fine_value - coarse_value))
        if coarse.holds != holds:
            logger.warning("Gronwall verdict changes between resolutions %d and %d.", resolution // 2, resolution)

    ladder = [
        EnergyRow(
            t=float(t),
            Q=float(q),
            L2_curvature=float(l2),
            gronwall_bound=float(bound),
            pi_sup=float(sup),
            pi_integral=float(integral),
        )
        for t, q, l2, bound, sup, integral in zip(t_values, energies, l2_norms, bounds, pi_sups, pi_integral)
    ]
    return EnergyReportSchema(
        ladder=ladder,
        budget_constant=structural_constant,
        empirical_constant=empirical,
        holds=holds,
        initial_curvature_ok=l2_norms[0] <= budget.R0,
        error_bars=error_bars,
    )


def metric_equivalence(
    metric: MetricField,
    budget: AssumptionBudgetSchema,
    t_range: list[float],
    resolution: int,
    cutoff_box: list[list[float]] | None = None,
    chart_id: str = "main",
) -> MetricEquivalenceReport:
    """
    Two-sided bound C^-1 |xi|^2 <= g_ij xi^i xi^j <= C |xi|^2 over the slices of t_range.

    The prediction is C = I0 exp(1/2 integral of sup |n k|_g), since d/dt g(X, X) = -(n/2) k(X, X)
    with k = -(2/n) d_t g.
    """
    t_values = np.asarray(t_range, dtype=float)
    nodes = slice_grid(metric, float(t_values[0]), resolution, cutoff_box, chart_id).nodes
    lambda_min, lambda_max = np.inf, 0.0
    sups = []
    initial_constant = None
    for t in t_values:
        s = sample_batch(metric, np.full(len(nodes), t), nodes, chart_id)
        constant, low, high = equivalence_constant(s.g)
        if initial_constant is None:
            initial_constant = constant
        lambda_min, lambda_max = min(lambda_min, low), max(lambda_max, high)
        sups.append(float(np.max(spatial_norm(s.n[..., None, None] * s.k, s.g))))
    integral = _running_integral(t_values, np.array(sups))[-1]
    empirical = max(lambda_max, 1.0 / lambda_min)
    predicted = budget.I0 * float(np.exp(0.5 * integral))
    initial_ok = initial_constant <= budget.I0 * (1.0 + RELATIVE_SLACK)
    return MetricEquivalenceReport(
        lambda_min=float(lambda_min),
        lambda_max=float(lambda_max),
        initial_constant=float(initial_constant),
        empirical_constant=float(empirical),
        predicted_constant=predicted,
        initial_ok=initial_ok,
        passed=initial_ok and empirical <= predicted * (1.0 + RELATIVE_SLACK),
    )
