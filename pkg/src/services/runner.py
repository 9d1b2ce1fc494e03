import logging
from pathlib import Path

from config import BaseAppSettings, get_report_storage, get_settings, get_summary_renderer, get_worker_pool
from exceptions import (
    BaseReportStorageError,
    BudgetAuditFailedError,
    DeltaBeyondInjectivityError,
    ScenarioParseError,
)
from services.context import RunContext
from services.energy import run_energy
from services.flux import run_flux
from services.injectivity import run_injectivity
from services.manifest import build_manifest, write_manifest
from services.scenario_loader import (
    apply_overrides,
    audit_scenario_budget,
    base_points,
    load_scenario,
    resolve_scenario_path,
    scenario_metric,
)
from services.trace import run_trace
from services.verify import failed_checks, run_verify


logger = logging.getLogger(__name__)

COMMANDS = ("trace", "injectivity", "flux", "energy", "verify")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_SCENARIO_ERROR = 2
EXIT_PRECONDITION = 3


def output_dir(scenario_name: str, scenario_out: str | None, out: str | None, settings: BaseAppSettings) -> Path:
    if out is not None:
        return Path(out)
    if scenario_out is not None:
        return Path(scenario_out)
    return settings.OUTPUT_DIR / scenario_name


def _dispatch(ctx: RunContext, audit) -> int:
    if ctx.command == "trace":
        run_trace(ctx)
    elif ctx.command == "injectivity":
        run_injectivity(ctx)
    elif ctx.command == "flux":
        run_flux(ctx)
    elif ctx.command == "energy":
        run_energy(ctx)
    else:
        table = run_verify(ctx, audit)
        renderer = get_summary_renderer(ctx.settings)
        ctx.storage.write_text("summary.md", renderer.render_verify_summary(ctx.scenario.name, build_manifest(ctx)))
        if failed_checks(table):
            return EXIT_CHECK_FAILED
    return EXIT_OK


def run(
    command: str,
    scenario_path: str | Path,
    grid_level: int | None = None,
    s_max: float | None = None,
    tol: float | None = None,
    workers: int | None = None,
    force: bool = False,
    out: str | None = None,
    settings: BaseAppSettings | None = None,
) -> int:
    """
    Load a scenario, audit its budget and run one command, writing reports and the manifest.

    :return: Process exit status: 0 success, 1 failed verify check, 2 scenario error,
        3 budget audit failure without force or a flux depth beyond the injectivity radius.
    """
    if command not in COMMANDS:
        raise ValueError(f"Unknown command '{command}'.")
    settings = settings or get_settings()
    try:
        path = resolve_scenario_path(scenario_path, settings.SCENARIOS_DIR)
        scenario = apply_overrides(load_scenario(path), grid_level, s_max, tol)
        metric = scenario_metric(scenario)
        points = base_points(metric, scenario)
    except ScenarioParseError as e:
        logger.error("%s", e)
        return EXIT_SCENARIO_ERROR

    executor = get_worker_pool(workers, settings)
    ctx = RunContext(
        command=command,
        scenario=scenario,
        metric=metric,
        points=points,
        settings=settings,
        storage=get_report_storage(output_dir(scenario.name, scenario.output_dir, out, settings)),
        executor=executor,
        force=force,
    )
    logger.info("Running %s on scenario '%s' (%s).", command, scenario.name, metric.family)
    try:
        with ctx.timed("budget_audit"):
            audit = audit_scenario_budget(metric, scenario, force)
        ctx.storage.write_json("budget_audit.json", audit)
        status = _dispatch(ctx, audit)
        write_manifest(ctx)
    except (BudgetAuditFailedError, DeltaBeyondInjectivityError) as e:
        logger.error("%s", e)
        return EXIT_PRECONDITION
    except ScenarioParseError as e:
        logger.error("%s", e)
        return EXIT_SCENARIO_ERROR
    except BaseReportStorageError as e:
        logger.error("%s", e)
        return EXIT_CHECK_FAILED
    finally:
        executor.shutdown()
    return status
