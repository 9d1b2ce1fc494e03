import math

import numpy as np
import pytest

from cutlocus import (
    SpatialHash,
    ball_inclusion_check,
    default_t_levels,
    detect_intersections,
    injectivity_report,
    opposite_angle_check,
    radius_error_bar,
    sample_slab_points,
    slab_scan,
)
from exceptions import AssumptionCViolatedError, LevelOutOfRangeError
from geodesics import icosphere, trace_fan
from metric import SpacetimePoint, build_metric
from schemas import Beyond, IntersectionEventSchema, MetricSpecSchema, PointSchema


def make_event(angle: float, kind: str = "crossing") -> IntersectionEventSchema:
    return IntersectionEventSchema(
        t_event=-0.5,
        q=PointSchema(t=-0.5, x=[0.0, 0.5, 0.5]),
        omega1=0,
        omega2=1,
        s1=0.5,
        s2=0.5,
        angle_at_q=angle,
        windings=([0, 0, 0], [1, 0, 0]),
        distance=0.0,
        kind=kind,
    )


@pytest.mark.unit
class TestSpatialHash:
    def test_candidates_near_point(self):
        """
        Test querying an open spatial hash.

        Ensures nearby keys are returned and distant keys are not.
        """
        spatial_hash = SpatialHash(0.1, (None, None, None))
        spatial_hash.insert("near", (0.05, 0.0, 0.0))
        spatial_hash.insert("far", (3.0, 0.0, 0.0))

        candidates = spatial_hash.query_candidates((0.0, 0.0, 0.0), 0.1)

        assert "near" in candidates, "Nearby key was not returned."
        assert "far" not in candidates, "Distant key should not be a candidate."

    def test_periodic_pairs_across_boundary(self):
        """
        Test candidate pairs on a periodic box.

        Ensures points on opposite faces of the fundamental domain are paired.
        """
        spatial_hash = SpatialHash(0.1, (1.0, 1.0, 1.0))
        points = {0: np.array([0.01, 0.5, 0.5]), 1: np.array([0.99, 0.5, 0.5]), 2: np.array([0.5, 0.5, 0.5])}

        pairs = spatial_hash.candidate_pairs(points, 0.05)

        assert (0, 1) in pairs, "Points across the periodic face must pair."
        assert (0, 2) not in pairs and (1, 2) not in pairs, "The centre point is far from both."

    def test_invalid_cell_size(self):
        """
        Test a spatial hash with a non-positive cell size.

        Ensures a ValueError is raised.
        """
        with pytest.raises(ValueError):
            SpatialHash(0.0, (None,))


@pytest.mark.unit
class TestOppositeAngle:
    def test_deviation_from_pi(self):
        """
        Test the opposite angle check at a crossing.

        Ensures the deviation is |angle - pi|.
        """
        result = opposite_angle_check(make_event(math.pi - 0.01))

        assert not result.skipped, "A crossing must be checked."
        assert result.deviation == pytest.approx(0.01), "Deviation is wrong."

    @pytest.mark.parametrize("angle, kind, reason", [(1.0, "conjugate", "near-conjugate"), (float("nan"), "crossing", "unrelated")])
    def test_skipped_events(self, angle, kind, reason):
        """
        Test events where the angle cannot be checked.

        Ensures conjugate events and missing angles are skipped with a reason.
        """
        result = opposite_angle_check(make_event(angle, kind))

        assert result.skipped, "Event should be skipped."
        assert result.deviation is None, "Skipped events carry no deviation."
        assert reason in result.reason, f"Unexpected reason {result.reason}."


@pytest.mark.unit
class TestRadiusHelpers:
    def test_error_bar_between_levels(self):
        """
        Test the error bar between a fine and a coarse estimate.

        Ensures the error is the absolute difference of finite values.
        """
        bar = radius_error_bar(0.5, 0.52)

        assert bar.error == pytest.approx(0.02), "Error bar is wrong."
        assert not bar.unresolved

    def test_error_bar_beyond(self):
        """
        Test the error bar when the fine estimate is beyond the horizon.

        Ensures no value and no error are reported.
        """
        bar = radius_error_bar(Beyond(beyond=1.0), 0.5)

        assert bar.value is None and bar.error is None, "Beyond values have no error bar."

    def test_slab_points_are_reproducible(self, flat_torus):
        """
        Test sampling base points in a periodic slab.

        Ensures the points lie in the fundamental domain and depend only on the seed.
        """
        first = sample_slab_points(flat_torus, (-1.0, 0.0), 5, seed=3)
        second = sample_slab_points(flat_torus, (-1.0, 0.0), 5, seed=3)

        assert [p.x for p in first] == [p.x for p in second], "Same seed must give the same points."
        for p in first:
            assert -1.0 <= p.t <= 0.0, "Time outside the slab."
            assert all(0.0 <= value < 1.0 for value in p.x), "Point outside the fundamental domain."

    def test_default_levels(self, minkowski, origin, tolerances, executor):
        """
        Test the default slice levels of a fan.

        Ensures evenly spaced levels down to the depth every ray reaches.
        """
        fan = trace_fan(minkowski, origin, icosphere(0), 1.0, tolerances, executor=executor)
        levels = default_t_levels(fan, 4)

        assert levels == pytest.approx([-0.25, -0.5, -0.75, -1.0]), f"Unexpected levels {levels}."


@pytest.mark.unit
class TestBallInclusion:
    def test_minkowski_ball_inclusion(self, minkowski, origin, tolerances, executor):
        """
        Test the ball inclusion check in Minkowski space.

        Ensures every inclusion holds and the audited epsilon vanishes.
        """
        report = ball_inclusion_check(minkowski, origin, -0.5, 0.1, 1, tolerances, executor=executor)

        assert report.eps_audited == pytest.approx(0.0), "Flat metric has no deviation."
        assert report.inner_ok and report.outer_ok and report.annulus_ok, f"Inclusion failed: {report}"

    def test_level_above_vertex(self, minkowski, origin, tolerances):
        """
        Test the ball inclusion check at a level above the vertex.

        Ensures LevelOutOfRangeError is raised.
        """
        with pytest.raises(LevelOutOfRangeError):
            ball_inclusion_check(minkowski, origin, 0.5, 0.1, 1, tolerances)

    def test_level_outside_r0_window(self, minkowski, origin, tolerances):
        """
        Test the ball inclusion check at a level deeper than r0 / 3 below the vertex.

        Ensures AssumptionCViolatedError is raised before any ray is traced.
        """
        with pytest.raises(AssumptionCViolatedError):
            ball_inclusion_check(minkowski, origin, -0.5, 0.1, 1, tolerances, r0=1.0)

    def test_perturbed_minkowski_margins(self, origin, tolerances, executor):
        """
        Test the ball inclusion check on a lapse perturbation of size 0.01 at t = -1.

        Ensures all three inclusions hold with strictly positive margins.
        """
        metric = build_metric(
            MetricSpecSchema(
                family="lapse_bump",
                params={"amplitude": 0.01, "width": 1.0, "center": [0.0, 0.0, 0.0]},
                interval=(-2.0, 0.0),
            )
        )

        report = ball_inclusion_check(metric, origin, -1.0, 0.01, 2, tolerances, executor=executor, r0=3.0)

        assert report.eps_audited <= 0.01, f"Audited eps {report.eps_audited} exceeds 0.01."
        assert report.inner_ok and report.outer_ok and report.annulus_ok, f"Inclusion failed: {report}"
        margins = (report.inner_margin, report.outer_margin, report.annulus_margin)
        assert min(margins) > 0.0, f"Non-positive margin in {margins}."

    def test_declared_epsilon_too_small(self, lapse_bump, origin, tolerances):
        """
        Test the ball inclusion check with a declared epsilon below the measured deviation.

        Ensures AssumptionCViolatedError is raised.
        """
        with pytest.raises(AssumptionCViolatedError):
            ball_inclusion_check(lapse_bump, origin, -0.5, 0.0, 1, tolerances)


@pytest.mark.slow
class TestIntersections:
    def test_minkowski_has_no_intersections(self, minkowski, origin, tolerances, executor):
        """
        Test intersection detection on the Minkowski cone.

        Ensures no pair of distinct rays meets.
        """
        fan = trace_fan(minkowski, origin, icosphere(3), 1.5, tolerances, executor=executor)
        events, diagnostics = detect_intersections(minkowski, fan, default_t_levels(fan, 12))

        assert events == [], f"Unexpected events {events}."
        assert len(diagnostics) == 12, "One diagnostic per slice."

    def test_flat_torus_cut(self, flat_torus, torus_center, tolerances, executor):
        """
        Test the injectivity report on the flat torus of period 1.

        Ensures opposite generators meet at l*_t = 1/2 with opposing tangents, and no conjugate points.
        """
        report = injectivity_report(
            flat_torus, torus_center, None, 1.0, 3, tolerances, level_count=24, executor=executor, with_error_bars=False
        )

        assert isinstance(report.s_star, Beyond), "Flat torus has no conjugate points."
        assert report.ell_star_t == pytest.approx(0.5, abs=2e-2), f"Expected l*_t = 1/2, got {report.ell_star_t}."
        assert report.i_star == pytest.approx(0.5, abs=2e-2), "i* must equal the first intersection."
        deviations = [opposite_angle_check(event).deviation for event in report.events]
        assert min(d for d in deviations if d is not None) < 1e-3, "First crossings must be head on."

    def test_flat_torus_cut_at_level_four(self, flat_torus, torus_center, tolerances, executor):
        """
        Test the first crossing time on the flat torus with the level-4 direction grid.

        Ensures l*_t = 1/2 within 0.01 and head-on tangents on the first crossing slice.
        """
        fan = trace_fan(flat_torus, torus_center, icosphere(4), 0.7, tolerances, executor=executor)

        events, _ = detect_intersections(
            flat_torus, fan, default_t_levels(fan, 28), match_factor=tolerances.match_factor, stop_after_first=True
        )

        assert events, "Opposite generators must meet before s = 0.7."
        earliest = max(events, key=lambda event: event.t_event)
        assert torus_center.t - earliest.t_event == pytest.approx(0.5, abs=1e-2), f"l*_t = {torus_center.t - earliest.t_event}."
        deviations = [opposite_angle_check(event).deviation for event in events]
        assert min(d for d in deviations if d is not None) < 1e-3, "First crossings must be head on."

    def test_slab_scan_minima(self, minkowski, tolerances, executor):
        """
        Test the slab scan over two Minkowski base points.

        Ensures one row per point and no conjugate point anywhere in the slab.
        """
        points = [SpacetimePoint.of(0.0, (0.0, 0.0, 0.0)), SpacetimePoint.of(-0.5, (0.3, -0.2, 0.1))]

        report = slab_scan(minkowski, points, None, 1.0, 2, tolerances, level_count=6, executor=executor)

        assert len(report.rows) == 2, "One row per base point."
        assert isinstance(report.min_s_star, Beyond), "Minkowski has no conjugate points."
        assert report.rows[1].point.t == pytest.approx(-0.5)
