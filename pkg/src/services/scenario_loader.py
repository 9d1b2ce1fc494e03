import hashlib
import json
import logging
import math
from pathlib import Path

import numpy as np
import yaml
from pydantic import ValidationError

from exceptions import BaseMetricError, BudgetAuditFailedError, ScenarioParseError
from metric import AuditGrid, MetricField, SpacetimePoint, budget_audit, build_metric
from schemas import BudgetAuditReport, ScenarioSchema


logger = logging.getLogger(__name__)

AUDIT_TIMES = 5
AUDIT_MIN_NODES = 5
AUDIT_MAX_NODES = 13
AUDIT_NODES_PER_SCALE = 4


def resolve_scenario_path(path: str | Path, scenarios_dir: Path) -> Path:
    """A bare name such as "flat_torus" refers to a bundled scenario when no such file exists."""
    path = Path(path)
    if path.exists() or path.suffix:
        return path
    bundled = scenarios_dir / f"{path.name}.yaml"
    return bundled if bundled.exists() else path


def load_scenario(path: str | Path) -> ScenarioSchema:
    """Read a YAML or JSON scenario file (chosen by suffix) and validate it."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioParseError(f"Cannot read scenario {path}: {e}") from e

    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ScenarioParseError(f"Cannot parse scenario {path}: {e}") from e

    if not isinstance(data, dict):
        raise ScenarioParseError(f"Scenario {path} must contain one mapping.")
    try:
        return ScenarioSchema.model_validate(data)
    except ValidationError as e:
        raise ScenarioParseError(f"Invalid scenario {path}: {e}") from e


def canonical_json(scenario: ScenarioSchema) -> str:
    return json.dumps(scenario.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def scenario_hash(scenario: ScenarioSchema) -> str:
    return hashlib.sha256(canonical_json(scenario).encode("utf-8")).hexdigest()


def apply_overrides(
    scenario: ScenarioSchema,
    grid_level: int | None = None,
    s_max: float | None = None,
    tol: float | None = None,
) -> ScenarioSchema:
    """Command-line flags take precedence over the scenario file."""
    data = scenario.model_dump()
    if grid_level is not None:
        data["grid_level"] = grid_level
    if s_max is not None:
        data["s_max"] = s_max
    if tol is not None:
        data["tolerances"].update(rtol=tol, atol=tol * 1e-2)
    try:
        return ScenarioSchema.model_validate(data)
    except ValidationError as e:
        raise ScenarioParseError(f"Invalid command-line override: {e}") from e


def scenario_metric(scenario: ScenarioSchema) -> MetricField:
    try:
        return build_metric(scenario.metric)
    except BaseMetricError as e:
        raise ScenarioParseError(str(e)) from e


def base_points(metric: MetricField, scenario: ScenarioSchema) -> list[SpacetimePoint]:
    points = [SpacetimePoint.of(point.t, point.x, point.chart_id) for point in scenario.base_points]
    for point in points:
        try:
            metric.locate(point)
        except BaseMetricError as e:
            raise ScenarioParseError(f"Base point {point} is not in the atlas: {e}") from e
    return points


def audit_grid(metric: MetricField, scenario: ScenarioSchema) -> AuditGrid:
    """
    Sample grid for the budget audit: slices across the interval, and per axis either one period,
    the chart, the energy cutoff box, or the region the cones from the base points can reach.
    """
    chart_id = scenario.base_points[0].chart_id
    chart = metric.chart(chart_id)
    t_min, t_max = metric.interval
    depth = max(point.t for point in scenario.base_points) - t_min
    cutoff_box = scenario.energy.cutoff_box if scenario.energy is not None else None

    axes = []
    bounds = [(t_min, t_max)]
    for axis in range(3):
        if chart.is_periodic(axis):
            lower, upper = chart.lower[axis], chart.lower[axis] + chart.periods[axis]
        elif cutoff_box is not None:
            lower, upper = cutoff_box[axis]
        else:
            values = [point.x[axis] for point in scenario.base_points]
            lower = max(min(values) - depth, chart.lower[axis])
            upper = min(max(values) + depth, chart.upper[axis])
        if not (math.isfinite(lower) and math.isfinite(upper)):
            lower, upper = -chart.scale, chart.scale
        count = math.ceil(AUDIT_NODES_PER_SCALE * (upper - lower) / chart.scale) + 1
        axes.append(np.linspace(lower, upper, min(max(count, AUDIT_MIN_NODES), AUDIT_MAX_NODES)))
        bounds.append((lower, upper))
    nodes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    return AuditGrid.product(np.linspace(t_min, t_max, AUDIT_TIMES), nodes, chart_id, bounds=bounds)


def audit_scenario_budget(metric: MetricField, scenario: ScenarioSchema, force: bool = False) -> BudgetAuditReport:
    report = budget_audit(metric, scenario.budget, audit_grid(metric, scenario))
    if not report.passed:
        failed = ", ".join(name for name, ok in report.checks.items() if not ok)
        if not force:
            raise BudgetAuditFailedError(f"Budget audit failed for scenario '{scenario.name}': {failed}.")
        logger.warning("Budget audit failed (%s); continuing because of --force.", failed)
    return report
