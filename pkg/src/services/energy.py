import logging
from dataclasses import dataclass

import numpy as np

from energy import gronwall_check, metric_equivalence, volume_radius
from exceptions import BallExitsChartError, ScenarioParseError, UnboundedDomainError
from geodesics import icosphere
from schemas import EnergyOptionsSchema, EnergyReportSchema, MetricEquivalenceReport, VolumeRadiusReport
from services.context import RunContext


logger = logging.getLogger(__name__)

DEFAULT_LEVELS = 3
ENERGY_HEADER = ("t", "Q", "L2_curvature", "gronwall_bound", "pi_sup", "pi_integral")
VOLUME_HEADER = ("point", "r", "volume", "ratio", "method")


@dataclass
class EnergyOutcome:
    energy: EnergyReportSchema
    equivalence: MetricEquivalenceReport
    volume: VolumeRadiusReport | None


def energy_options(ctx: RunContext) -> EnergyOptionsSchema:
    """Scenario energy options, or slices spread over the whole interval."""
    t_min, t_max = ctx.metric.interval
    options = ctx.scenario.energy
    if options is None:
        options = EnergyOptionsSchema(t_range=[float(t) for t in np.linspace(t_min, t_max, DEFAULT_LEVELS)])
    if not all(t_min <= t <= t_max for t in options.t_range):
        raise ScenarioParseError(f"Energy t_range {options.t_range} leaves the interval [{t_min}, {t_max}].")
    return options


def run_energy(ctx: RunContext) -> EnergyOutcome:
    scenario, metric = ctx.scenario, ctx.metric
    options = energy_options(ctx)
    chart_id = ctx.points[0].chart_id
    constant = options.structural_constant or ctx.settings.GRONWALL_CONSTANT

    try:
        with ctx.timed("energy"):
            energy = gronwall_check(
                metric,
                scenario.budget,
                options.t_range,
                options.slice_resolution,
                options.cutoff_box,
                structural_constant=constant,
                chart_id=chart_id,
                executor=ctx.executor,
            )
        with ctx.timed("metric_equivalence"):
            equivalence = metric_equivalence(
                metric, scenario.budget, options.t_range, options.slice_resolution, options.cutoff_box, chart_id
            )
    except UnboundedDomainError as e:
        raise ScenarioParseError(str(e)) from e
    ctx.record_error_bars("energy", energy.error_bars)
    ctx.storage.write_json("energy.json", energy)
    ctx.storage.write_json("metric_equivalence.json", equivalence)
    ctx.storage.write_csv(
        "energy.csv",
        ENERGY_HEADER,
        [[row.t, row.Q, row.L2_curvature, row.gronwall_bound, row.pi_sup, row.pi_integral] for row in energy.ladder],
    )

    points = options.volume_points or [list(p.x) for p in ctx.points if p.chart_id == chart_id]
    volume = None
    try:
        with ctx.timed("volume_radius"):
            volume = volume_radius(
                metric,
                options.t_range[0],
                points,
                options.rho,
                scenario.tolerances,
                chart_id=chart_id,
                grid=icosphere(scenario.grid_level),
                radii_per_octave=options.radii_per_octave,
                executor=ctx.executor,
            )
    except BallExitsChartError as e:
        logger.warning("Volume radius skipped: %s", e)
    if volume is not None:
        ctx.storage.write_json("volume_radius.json", volume)
        ctx.storage.write_csv(
            "volume_radius.csv",
            VOLUME_HEADER,
            [
                [k, row.r, row.volume, row.ratio, row.method]
                for k, point in enumerate(volume.points)
                for row in point.ladder
            ],
        )
    return EnergyOutcome(energy=energy, equivalence=equivalence, volume=volume)
