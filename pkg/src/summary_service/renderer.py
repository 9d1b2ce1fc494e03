from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from schemas import RunManifest


class SummaryRenderer:
    def __init__(self, templates_dir: Path):
        self.templates_dir = Path(templates_dir)
        self.template_env = Environment(
            loader=FileSystemLoader(self.templates_dir),
            undefined=StrictUndefined,
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
        )

    def render_template(self, template_name: str, **kwargs) -> str:
        template = self.template_env.get_template(template_name)
        return template.render(**kwargs)

    def render_verify_summary(self, scenario_name: str, manifest: RunManifest) -> str:
        counts = {"pass": 0, "fail": 0, "unresolved": 0}
        for row in manifest.verdicts:
            counts[row.verdict] += 1
        return self.render_template(
            "verify_summary.md.j2",
            scenario_name=scenario_name,
            manifest=manifest,
            counts=counts,
        )
