from services.context import RunContext
from services.scenario_loader import (
    load_scenario,
    resolve_scenario_path,
    canonical_json,
    scenario_hash,
    apply_overrides,
    scenario_metric,
    base_points,
    audit_grid,
    audit_scenario_budget,
)
from services.trace import trace_point, run_trace
from services.injectivity import InjectivityOutcome, run_injectivity
from services.flux import FluxOutcome, run_flux
from services.energy import EnergyOutcome, energy_options, run_energy
from services.verify import FLAT_FAMILIES, run_verify, failed_checks, grid_polyhedron_area
from services.manifest import MANIFEST_NAME, build_manifest, write_manifest
from services.runner import COMMANDS, run
