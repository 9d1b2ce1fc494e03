import logging
from dataclasses import dataclass, field

import numpy as np

from flux import RayProfile, flux_ladder_with_profiles, trchi_deviation
from schemas import FluxLadderReport, RadiusValue, TrChiDeviationReport
from services.context import RunContext


logger = logging.getLogger(__name__)

LADDER_HEADER = (
    "delta",
    "reduced_flux",
    "alpha",
    "beta",
    "rho",
    "sigma",
    "betabar",
    "total_flux",
    "principal_flux",
    "remainder_flux",
    "direct_flux",
    "positivity_margin",
    "vertex_error",
)
COEFFICIENT_HEADER = (
    "omega_index",
    "s",
    "trchi",
    "chihat_norm",
    "zeta_norm",
    "area_density",
    "phi",
    "psi_norm",
    "residual_phi",
    "residual_psi",
)
TRCHI_RANGE_START = 0.1


@dataclass
class FluxOutcome:
    ladders: list[FluxLadderReport] = field(default_factory=list)
    trchi: list[TrChiDeviationReport] = field(default_factory=list)


def _coefficient_rows(profiles: list[RayProfile]) -> list[list]:
    rows = []
    for profile in profiles:
        psi_norm = np.linalg.norm(profile.psi, axis=-1)
        for j in np.flatnonzero(profile.valid):
            rows.append(
                [
                    profile.index,
                    float(profile.s[j]),
                    float(profile.trchi[j]),
                    float(profile.chihat_norm[j]),
                    float(profile.zeta_norm[j]),
                    float(profile.area_density[j]),
                    float(profile.phi[j]),
                    float(psi_norm[j]),
                    float(profile.residual_phi[j]),
                    float(profile.residual_psi[j]),
                ]
            )
    return rows


def run_flux(ctx: RunContext, injectivity: list[RadiusValue | None] | None = None) -> FluxOutcome:
    """
    Flux ladder and tr chi deviation from every base point.

    A known injectivity estimate per point skips recomputing it for the precondition; the
    precondition failure propagates to the caller.
    """
    scenario, metric, settings = ctx.scenario, ctx.metric, ctx.settings
    deltas = scenario.delta_ladder
    outcome = FluxOutcome()
    for k, p in enumerate(ctx.points):
        known = injectivity[k] if injectivity is not None else None
        with ctx.timed("flux"):
            ladder, profiles = flux_ladder_with_profiles(
                metric,
                p,
                deltas,
                scenario.grid_level,
                scenario.tolerances,
                budget=scenario.budget,
                s_floor=settings.S_FLOOR,
                panels=settings.SIMPSON_PANELS,
                executor=ctx.executor,
                injectivity=known,
            )
        outcome.ladders.append(ladder)
        ctx.record_error_bars(f"flux_p{k}", ladder.error_bars)
        ctx.storage.write_json(f"flux_p{k}.json", ladder)
        ctx.storage.write_csv(
            f"flux_ladder_p{k}.csv",
            LADDER_HEADER,
            [
                [
                    row.delta,
                    row.reduced_flux,
                    *row.component_integrals.model_dump().values(),
                    row.total_flux,
                    row.principal_flux,
                    row.remainder_flux,
                    row.direct_flux,
                    row.positivity_margin,
                    row.vertex_error,
                ]
                for row in ladder.reports
            ],
        )
        ctx.storage.write_csv(f"coefficients_p{k}.csv", COEFFICIENT_HEADER, _coefficient_rows(profiles))

        s_high = max(deltas)
        with ctx.timed("trchi_deviation"):
            deviation = trchi_deviation(
                metric,
                p,
                scenario.grid_level,
                (min(TRCHI_RANGE_START, s_high / 2.0), s_high),
                scenario.tolerances,
                scenario.budget.epsilon0,
                s_floor=settings.S_FLOOR,
                panels=settings.SIMPSON_PANELS,
                executor=ctx.executor,
            )
        outcome.trchi.append(deviation)
        ctx.record_error_bars(f"trchi_p{k}", deviation.error_bars)
        ctx.storage.write_json(f"trchi_p{k}.json", deviation)
        if not deviation.within_epsilon0:
            logger.warning(
                "tr chi deviation %.3g or chihat integral %.3g exceeds epsilon0 = %.3g at %s.",
                deviation.fan_max_trchi_deviation,
                deviation.fan_max_chihat_integral,
                deviation.epsilon0,
                p,
            )
    return outcome
