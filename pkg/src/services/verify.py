import logging
import math

import numpy as np

from cutlocus import injectivity_report, opposite_angle_check, radius_error_bar
from exceptions import BaseAnalysisError, BaseGeodesicError, BaseMetricError, ScenarioParseError
from flux import transport_order
from geodesics import JacobiState, exponential_map, icosphere, integrate_geodesic
from schemas import BudgetAuditReport, Beyond, RadiusReportSchema, RadiusValue, VerdictRow, VerdictTable, radius_min
from services.context import RunContext
from services.energy import run_energy
from services.flux import run_flux
from services.injectivity import run_injectivity
from services.trace import trace_point


logger = logging.getLogger(__name__)

NUMERICAL_ERRORS = (BaseMetricError, BaseGeodesicError, BaseAnalysisError)

FLAT_FAMILIES = {"minkowski", "constant_lapse", "flat_torus"}
TORUS_FAMILIES = {"flat_torus", "perturbed_torus"}

VERTEX_S = 1e-2
VERTEX_TOLERANCE = 1e-3
TORUS_CUT_TOLERANCE = 1e-2
TORUS_CUT_MIN_LEVEL = 4
ERROR_BAR_SHRINK = 2.0
ERROR_BAR_FLOOR = 1e-6
CYLINDER_CONJUGATE_TOLERANCE = 1e-3
CYLINDER_DET_TOLERANCE = 1e-4
CYLINDER_TILT = math.pi / 6.0
OPPOSITE_ANGLE_TOLERANCE = 1e-3
ORDER_RATIO = 8.0
ORDER_FLOOR = 1e-11
ORDER_BASE_STEPS = 8
ORDER_HALVINGS = 2
ORDER_DIRECTION = np.array([1.0, 2.0, 3.0]) / math.sqrt(14.0)
FLUX_POSITIVITY_SLACK = 1e-9
FLAT_FLUX_TOLERANCE = 1e-8
FLUX_REFINEMENT_TOLERANCE = 1e-2
FLUX_ORACLE_TOLERANCE = 1e-6
STATIC_ENERGY_TOLERANCE = 1e-6
VOLUME_TOLERANCE = 1e-3
EUCLIDEAN_BALL_RATIO = 4.0 * math.pi / 3.0

OPPOSITE_ANCHOR = "\"point in the opposite directions\": |angle - pi| at the first intersection point"


def verdict(
    check: str,
    anchor: str,
    ok: bool,
    value: float | None = None,
    threshold: float | None = None,
    detail: str = "",
    asserted: bool = True,
) -> VerdictRow:
    return VerdictRow(
        check=check,
        anchor=anchor,
        verdict="pass" if ok else "fail",
        value=None if value is None or not math.isfinite(value) else float(value),
        threshold=threshold,
        asserted=asserted,
        detail=detail,
    )


def unresolved(check: str, anchor: str, detail: str, value: float | None = None, threshold: float | None = None) -> VerdictRow:
    return VerdictRow(
        check=check,
        anchor=anchor,
        verdict="unresolved",
        value=None if value is None or not math.isfinite(value) else float(value),
        threshold=threshold,
        detail=detail,
    )


def _finite(value: RadiusValue) -> float | None:
    return None if isinstance(value, Beyond) else float(value)


def grid_polyhedron_area(level: int) -> float:
    """Area of the flat triangles spanned by the unit direction grid."""
    grid = icosphere(level)
    a, b, c = (grid.vertices[grid.faces[:, k]] for k in range(3))
    return float(0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=-1).sum())


def vertex_ratio(ctx: RunContext, k: int) -> float:
    """sqrt(area(S_s) / (s^2 |grid|)) at a small s; the grid polyhedron removes the faceting bias."""
    p = ctx.points[k]
    grid = icosphere(ctx.scenario.grid_level)
    (cone_slice,) = exponential_map(
        ctx.metric,
        p,
        grid,
        [("fixed-s", VERTEX_S)],
        tolerances=ctx.scenario.tolerances,
        s_max=2.0 * VERTEX_S,
        executor=ctx.executor,
    )
    return math.sqrt(cone_slice.area / (VERTEX_S**2 * grid_polyhedron_area(grid.level)))


def order_row(check: str, anchor: str, steps: list[float], residuals: list[float]) -> VerdictRow:
    """
    Step-halving verdict: every halving whose coarse residual is above round-off must shrink it ORDER_RATIO times.

    A halving whose fine residual already sits at ORDER_FLOOR counts as converged.
    """
    detail = ", ".join(f"h = {h:.4g}: {r:.3g}" for h, r in zip(steps, residuals))
    ratios = [
        (coarse / fine if fine > 0.0 else math.inf, fine)
        for coarse, fine in zip(residuals[:-1], residuals[1:])
        if coarse > ORDER_FLOOR
    ]
    if not ratios:
        return unresolved(check, anchor, f"residual at round-off for every step ({detail})", threshold=ORDER_RATIO)
    ok = all(ratio >= ORDER_RATIO or fine <= ORDER_FLOOR for ratio, fine in ratios)
    return verdict(check, anchor, ok, min(ratio for ratio, _ in ratios), ORDER_RATIO, detail=detail)


def _order_checks(ctx: RunContext, k: int) -> list[VerdictRow]:
    metric, p = ctx.metric, ctx.points[k]
    chart = metric.chart(p.chart_id)
    s_end = min(chart.scale, 0.5 * (p.t - metric.interval[0]), ctx.scenario.s_max)
    steps = [s_end / ORDER_BASE_STEPS / 2**halving for halving in range(ORDER_HALVINGS + 1)]
    try:
        study = transport_order(metric, p, ORDER_DIRECTION, s_end, steps)
    except NUMERICAL_ERRORS as e:
        detail = f"fixed-step integration failed: {e}"
        return [
            unresolved(f"transport_order_p{k}", "phi and psi residuals shrink at least 8x per step halving", detail),
            unresolved(f"null_order_p{k}", "g(L, L) residual shrinks at least 8x per step halving", detail),
        ]
    return [
        order_row(
            f"transport_order_p{k}", "phi and psi residuals shrink at least 8x per step halving", study.steps, study.transport
        ),
        order_row(f"null_order_p{k}", "g(L, L) residual shrinks at least 8x per step halving", study.steps, study.null),
    ]


def _trace_checks(ctx: RunContext) -> list[VerdictRow]:
    rows = []
    tolerances = ctx.scenario.tolerances
    for k in range(len(ctx.points)):
        report = trace_point(ctx, k)
        rows.append(
            verdict(
                f"null_residual_p{k}",
                "g(L, L) = 0 along every generator",
                report.null_residual_max <= tolerances.null_tol,
                report.null_residual_max,
                tolerances.null_tol,
            )
        )
        if report.killing_residual_max is not None:
            rows.append(
                verdict(
                    f"static_energy_p{k}",
                    "g(L, d_t) is constant along generators of a static metric",
                    report.killing_residual_max <= tolerances.null_tol,
                    report.killing_residual_max,
                    tolerances.null_tol,
                )
            )
        ratio = vertex_ratio(ctx, k)
        rows.append(
            verdict(
                f"vertex_regularity_p{k}",
                "\"4π r² = |S_s|\": area(S_s) / (4 pi s^2) -> 1 as s -> 0",
                abs(ratio - 1.0) <= VERTEX_TOLERANCE,
                abs(ratio - 1.0),
                VERTEX_TOLERANCE,
                detail=f"s = {VERTEX_S}",
            )
        )
        if ctx.metric.family not in FLAT_FAMILIES:
            rows += _order_checks(ctx, k)
    return rows


def opposite_angle_row(check: str, report: RadiusReportSchema) -> VerdictRow | None:
    """Literal 1e-3 rad bound; a miss within one grid spacing is left unresolved as grid-limited."""
    if not report.events:
        return None
    earliest = max(report.events, key=lambda event: event.t_event)
    result = opposite_angle_check(earliest)
    if result.skipped:
        return VerdictRow(check=check, anchor=OPPOSITE_ANCHOR, verdict="unresolved", asserted=False, detail=result.reason)
    if result.deviation <= OPPOSITE_ANGLE_TOLERANCE:
        return verdict(check, OPPOSITE_ANCHOR, True, result.deviation, OPPOSITE_ANGLE_TOLERANCE)
    if result.deviation <= report.spacing:
        return unresolved(
            check,
            OPPOSITE_ANCHOR,
            f"deviation within the grid spacing {report.spacing:.3g} at level {report.grid_level}; refine the grid",
            result.deviation,
            OPPOSITE_ANGLE_TOLERANCE,
        )
    return verdict(check, OPPOSITE_ANCHOR, False, result.deviation, OPPOSITE_ANGLE_TOLERANCE)


def coarse_reports(ctx: RunContext, k: int, report: RadiusReportSchema) -> list[RadiusReportSchema]:
    """The injectivity analysis one and two grid levels down, on the fine report's slice levels."""
    scenario, p = ctx.scenario, ctx.points[k]
    if report.grid_level < 2:
        return []
    reports = []
    for level in (report.grid_level - 2, report.grid_level - 1):
        reports.append(
            injectivity_report(
                ctx.metric,
                p,
                None,
                scenario.s_max,
                level,
                scenario.tolerances,
                t_levels=scenario.t_levels,
                level_count=scenario.level_count,
                executor=ctx.executor,
                with_error_bars=False,
            )
        )
    return reports


def _refinement_checks(ctx: RunContext, k: int, report: RadiusReportSchema) -> list[VerdictRow]:
    try:
        ladder = coarse_reports(ctx, k, report) + [report]
    except NUMERICAL_ERRORS as e:
        return [unresolved(f"refinement_p{k}", "injectivity analysis over three grid levels", str(e))]
    if len(ladder) < 3:
        return []
    rows = []
    levels = ", ".join(str(level.grid_level) for level in ladder)

    deviations = []
    for level in ladder:
        row = opposite_angle_row("", level)
        deviations.append(None if row is None or row.value is None else row.value)
    if all(deviation is not None for deviation in deviations):
        rows.append(
            verdict(
                f"opposite_angle_refinement_p{k}",
                "|angle - pi| at the first intersection nonincreasing under grid refinement",
                all(b <= a + 1e-12 for a, b in zip(deviations[:-1], deviations[1:])),
                deviations[-1],
                detail=f"levels {levels}: " + ", ".join(f"{deviation:.3g}" for deviation in deviations),
            )
        )

    if ctx.metric.family in TORUS_FAMILIES:
        coarse_bar = radius_error_bar(ladder[1].ell_star_t, ladder[0].ell_star_t)
        fine_bar = radius_error_bar(ladder[2].ell_star_t, ladder[1].ell_star_t)
        check, anchor = f"torus_error_bar_p{k}", "error bar of l*_t shrinks at least 2x per grid level"
        if coarse_bar.error is None or fine_bar.error is None:
            rows.append(unresolved(check, anchor, f"l*_t not found at every level {levels}"))
        else:
            ok = fine_bar.error <= ERROR_BAR_FLOOR or coarse_bar.error >= ERROR_BAR_SHRINK * fine_bar.error
            rows.append(
                verdict(
                    check,
                    anchor,
                    ok,
                    coarse_bar.error / fine_bar.error if fine_bar.error > 0.0 else math.inf,
                    ERROR_BAR_SHRINK,
                    detail=f"errors {coarse_bar.error:.3g} -> {fine_bar.error:.3g} over levels {levels}",
                    asserted=report.grid_level >= TORUS_CUT_MIN_LEVEL,
                )
            )
    return rows


def cylinder_det_deviation(ctx: RunContext, k: int, radius: float) -> float:
    """
    max |det A(s) - s (R/c) sin(c s / R)| for an equatorial ray (c = 1) and a ray tilted towards the axis.

    c is the sphere fraction of the unit spatial direction.
    """
    p, tolerances = ctx.points[k], ctx.scenario.tolerances
    deviation = 0.0
    for tilt in (0.0, CYLINDER_TILT):
        omega = np.array([0.0, math.cos(tilt), math.sin(tilt)])
        c = math.cos(tilt)
        s_end = min(0.9 * math.pi * radius / c, ctx.scenario.s_max)
        ray = integrate_geodesic(ctx.metric, p, omega, s_end, tolerances, extended=True)
        state = JacobiState(metric=ctx.metric, along=ray)
        for s in np.linspace(0.1 * s_end, ray.s_end, 12):
            expected = s * (radius / c) * math.sin(c * s / radius)
            deviation = max(deviation, abs(state.transverse_det(float(s)) - expected))
    return deviation


def _cylinder_checks(ctx: RunContext, k: int, report: RadiusReportSchema) -> list[VerdictRow]:
    radius = float(ctx.scenario.metric.params.get("radius", 1.0))
    s_star = _finite(report.s_star)
    rows = [
        verdict(
            f"cylinder_conjugate_p{k}",
            "\"null radius of conjugacy of the point\": s* = pi R on R x S^2(R) x R",
            s_star is not None and abs(s_star - math.pi * radius) <= CYLINDER_CONJUGATE_TOLERANCE,
            s_star,
            math.pi * radius,
            detail=f"tolerance {CYLINDER_CONJUGATE_TOLERANCE}",
        )
    ]
    ell_star = _finite(report.ell_star)
    cell = report.spacing * math.pi * radius
    anchor = "first fan crossing l* agrees with s* within one grid cell"
    if ell_star is None or s_star is None:
        rows.append(unresolved(f"cylinder_crossing_p{k}", anchor, "no crossing or conjugate point before s_max"))
    else:
        rows.append(
            verdict(f"cylinder_crossing_p{k}", anchor, abs(ell_star - s_star) <= cell, abs(ell_star - s_star), cell)
        )
    try:
        deviation = cylinder_det_deviation(ctx, k, radius)
    except NUMERICAL_ERRORS as e:
        rows.append(unresolved(f"cylinder_det_p{k}", "det A(s) = s (R/c) sin(c s / R)", str(e)))
    else:
        rows.append(
            verdict(
                f"cylinder_det_p{k}",
                "det A(s) = s (R/c) sin(c s / R)",
                deviation <= CYLINDER_DET_TOLERANCE,
                deviation,
                CYLINDER_DET_TOLERANCE,
            )
        )
    return rows


def _injectivity_checks(ctx: RunContext, outcome) -> list[VerdictRow]:
    family = ctx.metric.family
    params = ctx.scenario.metric.params
    rows = []
    for k, report in enumerate(outcome.reports):
        if report is None:
            rows.append(unresolved(f"injectivity_p{k}", "\"i*(p) = min(l*(p), s*(p))\"", outcome.unresolved[k]))
            if family in TORUS_FAMILIES:
                rows.append(unresolved(f"torus_cut_p{k}", "l*_t = L / 2 on the flat torus", outcome.unresolved[k]))
            continue

        expected = radius_min(report.s_star, report.ell_star)
        rows.append(
            verdict(
                f"injectivity_min_rule_p{k}",
                "\"i*(p) = min(l*(p), s*(p))\"",
                expected == report.i_star,
                _finite(report.i_star),
            )
        )

        row = opposite_angle_row(f"opposite_angle_p{k}", report)
        if row is not None:
            rows.append(row)
            rows += _refinement_checks(ctx, k, report)

        if family in FLAT_FAMILIES:
            rows.append(
                verdict(
                    f"no_conjugate_points_p{k}",
                    "\"no conjugate points for the congruence\" of a flat metric",
                    isinstance(report.s_star, Beyond),
                    _finite(report.s_star),
                )
            )
        if family == "flat_torus":
            period = float(params.get("period", 1.0))
            value = _finite(report.ell_star_t)
            check, anchor = f"torus_cut_p{k}", "l*_t = L / 2 on the flat torus"
            if value is not None and abs(value - period / 2.0) <= TORUS_CUT_TOLERANCE * period:
                rows.append(verdict(check, anchor, True, value, period / 2.0))
            elif report.grid_level < TORUS_CUT_MIN_LEVEL:
                rows.append(
                    unresolved(check, anchor, f"grid level {report.grid_level} is below {TORUS_CUT_MIN_LEVEL}", value, period / 2.0)
                )
            else:
                rows.append(verdict(check, anchor, False, value, period / 2.0))
        if family == "spherical_cylinder":
            rows += _cylinder_checks(ctx, k, report)

    for k, ball in outcome.balls.items():
        rows.append(
            verdict(
                f"ball_inclusion_p{k}",
                "\"B_{t,(1−3ε)|t|} ⊂ I⁻(p) ∩ Σ_t\" and \"N⁻(p) ∩ Σ_t ⊂ B_{t,(1+3ε)|t|}\"",
                ball.inner_ok and ball.outer_ok and ball.annulus_ok,
                min(ball.inner_margin, ball.outer_margin, ball.annulus_margin),
                0.0,
                detail=f"t = {ball.t_level}",
            )
        )
    for k, reason in outcome.ball_failures.items():
        rows.append(
            verdict(
                f"ball_inclusion_p{k}",
                "|n - n(p)| and |g - delta| within the declared eps for -r0/3 <= t <= 0",
                False,
                detail=reason,
            )
        )
    if outcome.slab is not None:
        value = _finite(outcome.slab.min_i_star)
        delta_star = ctx.scenario.budget.delta_star
        rows.append(
            verdict(
                "slab_injectivity",
                "i* >= delta_star over the slab",
                value is None or value >= delta_star,
                value,
                delta_star,
                asserted=False,
            )
        )
    return rows


def _flux_checks(ctx: RunContext, outcome) -> list[VerdictRow]:
    tolerances = ctx.scenario.tolerances
    family = ctx.metric.family
    rows = []
    for k, (ladder, deviation) in enumerate(zip(outcome.ladders, outcome.trchi)):
        margin = min(report.positivity_margin for report in ladder.reports)
        rows.append(
            verdict(f"flux_positive_p{k}", "q_total >= 0", margin >= -FLUX_POSITIVITY_SLACK, margin, -FLUX_POSITIVITY_SLACK)
        )
        rows.append(
            verdict(
                f"flux_monotone_p{k}",
                "\"reduced flux, or geodesic curvature flux\" R(delta) nondecreasing in delta",
                ladder.monotone,
            )
        )
        oracle = max(abs(report.total_flux - report.direct_flux) / max(abs(report.direct_flux), 1.0) for report in ladder.reports)
        rows.append(
            verdict(
                f"flux_oracle_p{k}",
                "q_principal + q_remainder equals the dense Bel-Robinson contraction",
                oracle <= FLUX_ORACLE_TOLERANCE,
                oracle,
                FLUX_ORACLE_TOLERANCE,
            )
        )
        bar = ladder.error_bars.get("reduced_flux")
        if bar is not None and bar.coarse_value is not None and abs(bar.value) > FLAT_FLUX_TOLERANCE:
            relative = bar.error / abs(bar.value)
            rows.append(
                verdict(
                    f"flux_refinement_p{k}",
                    "R(delta) stable under one grid refinement",
                    relative <= FLUX_REFINEMENT_TOLERANCE,
                    relative,
                    FLUX_REFINEMENT_TOLERANCE,
                    detail=f"levels {ladder.grid_level - 1} -> {ladder.grid_level}",
                    asserted=family == "spherical_cylinder",
                )
            )
        transport = max(ladder.transport_residual_phi, ladder.transport_residual_psi)
        rows.append(
            verdict(
                f"transport_p{k}",
                "\"φ⁻¹ = g(T, L)\" and \"ψ_a = g(e_a, T)\" obey their transport equations along L",
                transport <= tolerances.transport_tol,
                transport,
                tolerances.transport_tol,
            )
        )
        rows.append(
            verdict(
                f"foliation_p{k}",
                "T = -1/2 phi (1 + |psi|^2) L - 1/2 phi^-1 Lbar + psi_a e_a",
                ladder.foliation_residual <= tolerances.transport_tol,
                ladder.foliation_residual,
                tolerances.transport_tol,
            )
        )
        coercivity = ladder.coercivity
        rows.append(
            verdict(
                f"coercivity_p{k}",
                "q_total >= 1/2 q_principal >= 1/8 (|a|^2 + |b|^2 + r^2 + s^2 + |bb|^2)",
                coercivity.passed,
                coercivity.min_total_over_principal,
                0.5,
            )
        )
        rows.append(
            verdict(
                f"smallness_p{k}",
                "\"|φ−1| + |ψ| ≤ 10⁻³\" along the cone",
                ladder.smallness.improved_ok,
                ladder.smallness.max_deviation,
                asserted=False,
                detail="bootstrap ok" if ladder.smallness.bootstrap_ok else "bootstrap bound exceeded",
            )
        )
        if family in FLAT_FAMILIES:
            value = ladder.reports[-1].reduced_flux
            rows.append(
                verdict(
                    f"flat_flux_p{k}",
                    "R(delta) = 0 in a flat metric",
                    value <= FLAT_FLUX_TOLERANCE,
                    value,
                    FLAT_FLUX_TOLERANCE,
                )
            )
        rows.append(
            verdict(
                f"trchi_deviation_p{k}",
                "\"|tr χ − 2/s| ≤ ε₀\" and the integral of |chihat|^2 below epsilon0",
                deviation.within_epsilon0,
                max(deviation.fan_max_trchi_deviation, deviation.fan_max_chihat_integral),
                deviation.epsilon0,
            )
        )
    return rows


def _energy_checks(ctx: RunContext) -> list[VerdictRow]:
    try:
        outcome = run_energy(ctx)
    except ScenarioParseError as e:
        logger.warning("Energy checks skipped: %s", e)
        return []
    energy, equivalence, volume = outcome.energy, outcome.equivalence, outcome.volume
    q_values = [row.Q for row in energy.ladder]
    rows = [
        verdict("energy_nonnegative", "\"Q_{0000} = |E|² + |H|²\" >= 0", min(q_values) >= 0.0, min(q_values), 0.0),
        verdict(
            "gronwall",
            "\"Q(t) ≲ Q(t₀) exp(N₀ K₀)\": Q(t) <= Q(t0) exp(c N0 int |pi|)",
            energy.holds,
            energy.empirical_constant,
            energy.budget_constant,
        ),
        verdict(
            "initial_curvature",
            "||R(t0)||_L2 <= R0",
            energy.initial_curvature_ok,
            energy.ladder[0].L2_curvature,
            ctx.scenario.budget.R0,
        ),
        verdict(
            "metric_equivalence",
            "\"C⁻¹|ξ|² ≤ g_ij(t,x) ξ^i ξ^j ≤ C|ξ|²\"",
            equivalence.passed,
            equivalence.empirical_constant,
            equivalence.predicted_constant,
        ),
    ]
    if ctx.metric.static:
        q0 = q_values[0]
        drift = max(abs(q - q0) for q in q_values) / q0 if q0 > 0.0 else max(q_values)
        rows.append(
            verdict(
                "static_energy",
                "Q(t) = Q(t0) for a static metric",
                drift <= STATIC_ENERGY_TOLERANCE,
                drift,
                STATIC_ENERGY_TOLERANCE,
            )
        )
    if volume is not None:
        if ctx.metric.family in FLAT_FAMILIES:
            error = abs(volume.slice_infimum - EUCLIDEAN_BALL_RATIO)
            rows.append(
                verdict(
                    "volume_radius",
                    "\"r_vol(p,ρ) = inf_{r≤ρ} |B_r(p)|/r³\" = 4 pi / 3 on a Euclidean slice",
                    error <= VOLUME_TOLERANCE,
                    volume.slice_infimum,
                    EUCLIDEAN_BALL_RATIO,
                )
            )
        else:
            rows.append(
                verdict(
                    "volume_radius",
                    "\"r_vol(p,ρ) = inf_{r≤ρ} |B_r(p)|/r³\" > 0",
                    volume.slice_infimum > 0.0,
                    volume.slice_infimum,
                    0.0,
                )
            )
    return rows


def run_verify(ctx: RunContext, audit: BudgetAuditReport) -> VerdictTable:
    """Run every check that applies to the scenario's metric family and write the verdict table."""
    rows = [
        verdict(
            "budget_audit",
            "\"N₀⁻¹ ≤ n ≤ N₀\", \"|I| · sup ‖π(t)‖_{L∞} ≤ K₀\" and I0 within the declared budget",
            audit.passed,
            detail=", ".join(name for name, ok in audit.checks.items() if not ok),
        )
    ]
    rows += _trace_checks(ctx)

    injectivity = run_injectivity(ctx)
    rows += _injectivity_checks(ctx, injectivity)

    known = [report.i_star if report is not None else None for report in injectivity.reports]
    rows += _flux_checks(ctx, run_flux(ctx, injectivity=known))
    rows += _energy_checks(ctx)

    table = VerdictTable(scenario=ctx.scenario.name, rows=rows)
    ctx.verdicts = rows
    ctx.storage.write_json("verdicts.json", table)
    failed = [row.check for row in rows if row.asserted and row.verdict == "fail"]
    if failed:
        logger.warning("Failed checks: %s", ", ".join(failed))
    return table


def failed_checks(table: VerdictTable) -> list[VerdictRow]:
    return [row for row in table.rows if row.asserted and row.verdict == "fail"]
