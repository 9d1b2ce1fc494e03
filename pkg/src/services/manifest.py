from schemas import RunManifest
from services.context import RunContext
from services.scenario_loader import scenario_hash


MANIFEST_NAME = "manifest.json"


def build_manifest(ctx: RunContext) -> RunManifest:
    artifacts = ctx.storage.artifacts()
    if MANIFEST_NAME not in artifacts:
        artifacts.append(MANIFEST_NAME)
    return RunManifest(
        command=ctx.command,
        scenario_hash=scenario_hash(ctx.scenario),
        tool_version=ctx.settings.TOOL_VERSION,
        wall_times=dict(ctx.wall_times),
        error_bars=dict(ctx.error_bars),
        verdicts=list(ctx.verdicts),
        artifacts=artifacts,
        scenario=ctx.scenario.model_dump(mode="json"),
    )


def write_manifest(ctx: RunContext) -> RunManifest:
    manifest = build_manifest(ctx)
    ctx.storage.write_json(MANIFEST_NAME, manifest)
    return manifest
