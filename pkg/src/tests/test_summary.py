import pytest

from config import get_summary_renderer
from schemas import RunManifest, VerdictRow


@pytest.mark.unit
class TestSummaryRenderer:
    def test_render_verify_summary(self, settings):
        """
        Test rendering the verification summary.

        Ensures counts, table rows and unresolved details appear in the markdown.
        """
        manifest = RunManifest(
            command="verify",
            scenario_hash="abc123",
            tool_version=settings.TOOL_VERSION,
            wall_times={"trace": 0.25},
            verdicts=[
                VerdictRow(check="null_residual_p0", anchor="|g(l, l)| <= null_tol", verdict="pass", value=1e-12, threshold=1e-9),
                VerdictRow(check="torus_cut_p0", anchor="l*_t = L / 2 on the flat torus", verdict="unresolved", detail="grid too coarse"),
            ],
            scenario={"name": "flat_torus"},
        )

        text = get_summary_renderer(settings).render_verify_summary("flat_torus", manifest)

        assert text.startswith("# Verification summary: flat_torus"), "Missing title."
        assert "1 pass, 0 fail, 1 unresolved" in text, "Verdict counts are wrong."
        assert "| null_residual_p0 | pass | 1e-12 | 1e-09 |" in text, "Table row is wrong."
        assert "- torus_cut_p0: grid too coarse" in text, "Unresolved detail is missing."
        assert "- trace: 0.250 s" in text, "Wall times are missing."
