import math

import numpy as np
import pytest

from exceptions import LevelOutOfRangeError
from geodesics import (
    conjugacy_radius,
    exponential_map,
    icosphere,
    integrate_geodesic,
    reparametrize,
    round_ratio,
    trace_fan,
)
from metric import SpacetimePoint, build_metric
from schemas import Beyond, MetricSpecSchema, TolerancesSchema
from services import grid_polyhedron_area


@pytest.mark.unit
class TestIcosphere:
    @pytest.mark.parametrize("level", [0, 1, 2, 3])
    def test_vertex_count_and_areas(self, level):
        """
        Test the icosphere direction grid.

        Ensures 10 * 4^level + 2 unit vertices whose areas sum to 4 pi.
        """
        grid = icosphere(level)

        assert len(grid) == 10 * 4**level + 2, f"Unexpected vertex count at level {level}."
        assert np.allclose(np.linalg.norm(grid.vertices, axis=1), 1.0), "Vertices must be unit vectors."
        assert grid.areas.sum() == pytest.approx(4.0 * math.pi, rel=1e-12), "Vertex areas must sum to 4 pi."

    def test_spacing_halves(self):
        """
        Test the angular spacing under refinement.

        Ensures each subdivision roughly halves the mean edge angle.
        """
        ratio = icosphere(2).spacing / icosphere(3).spacing

        assert 1.8 < ratio < 2.2, f"Expected the spacing to halve, got ratio {ratio}."

    def test_poles_on_first_axis(self):
        """
        Test the orientation of the base icosahedron.

        Ensures +-e_1 are vertices at every level.
        """
        for level in (0, 1, 2):
            vertices = icosphere(level).vertices
            for pole in (np.array([1.0, 0.0, 0.0]), np.array([-1.0, 0.0, 0.0])):
                assert np.min(np.linalg.norm(vertices - pole, axis=1)) < 1e-12, f"Missing pole {pole} at level {level}."

    @pytest.mark.parametrize("level", [-1, 7])
    def test_level_out_of_range(self, level):
        """
        Test icosphere levels outside the supported range.

        Ensures LevelOutOfRangeError is raised.
        """
        with pytest.raises(LevelOutOfRangeError):
            icosphere(level)


@pytest.mark.unit
class TestNullGeodesics:
    def test_minkowski_straight_ray(self, minkowski, origin, tolerances):
        """
        Test a past null ray in Minkowski space.

        Ensures x(s) = s omega and t(s) = -s with a vanishing null residual.
        """
        omega = np.array([0.0, 0.6, 0.8])
        ray = integrate_geodesic(minkowski, origin, omega, 1.0, tolerances)
        y, _ = ray.state(0.75)

        assert y[0] == pytest.approx(-0.75, abs=1e-10), "t(s) must decrease at unit rate."
        assert np.allclose(y[1:4], 0.75 * omega, atol=1e-10), "Spatial track must be straight."
        assert ray.null_residual_max < tolerances.null_tol, "Null residual exceeds tolerance."

    def test_constant_lapse_rescales_time(self, origin, tolerances):
        """
        Test a ray of g = -4 dt^2 + dx^2.

        Ensures the ray crosses t = -1/4 at s = 1/2 and x = 1/2.
        """
        metric = build_metric(MetricSpecSchema(family="constant_lapse", params={"lapse": 2.0}, interval=(-1.0, 0.0)))
        ray = integrate_geodesic(metric, origin, np.array([1.0, 0.0, 0.0]), 1.0, tolerances)
        point = reparametrize(ray, -0.25, metric.chart)

        assert point.s == pytest.approx(0.5, abs=1e-9), "Expected s = n |t| = 0.5."
        assert point.x[0] == pytest.approx(0.5, abs=1e-9), "Expected x = 0.5."

    def test_ray_stops_at_interval_start(self, minkowski, origin, tolerances):
        """
        Test a ray that reaches the start of the interval before s_max.

        Ensures integration terminates at t_min.
        """
        ray = integrate_geodesic(minkowski, origin, np.array([1.0, 0.0, 0.0]), 5.0, tolerances)

        assert ray.termination == "t_min", "Ray should stop at the interval start."
        assert ray.s_end == pytest.approx(2.0, abs=1e-8), "Interval of length 2 is reached at s = 2."

    def test_torus_ray_winds(self, flat_torus, torus_center, tolerances):
        """
        Test a ray on the flat torus crossing the fundamental domain.

        Ensures the wrapped position and the winding number match the straight lift.
        """
        ray = integrate_geodesic(flat_torus, torus_center, np.array([1.0, 0.0, 0.0]), 1.5, tolerances)
        point = ray.level_point(1.2, flat_torus.chart)

        assert point.x[0] == pytest.approx(0.7, abs=1e-9), "Wrapped coordinate is wrong."
        assert point.winding[0] == 1, "Expected one winding along x."

    def test_static_energy_is_conserved(self, lapse_bump, tolerances):
        """
        Test the static Killing energy along a ray of the bump metric.

        Ensures g(l, d_t) stays constant to integrator accuracy.
        """
        p = SpacetimePoint.of(0.0, (0.4, 0.0, 0.0))
        ray = integrate_geodesic(lapse_bump, p, np.array([-1.0, 0.0, 0.0]), 1.5, tolerances)

        assert ray.killing_residual_max is not None, "Static metrics must report a Killing residual."
        assert ray.killing_residual_max < 1e-8, "Killing energy drifts."


@pytest.mark.unit
class TestExponentialMap:
    def test_minkowski_fixed_t_slice_is_round(self, minkowski, origin, tolerances, executor):
        """
        Test a fixed-t slice of the Minkowski cone.

        Ensures the slice is a round sphere of radius |t| with full coverage.
        """
        grid = icosphere(2)
        (cone_slice,) = exponential_map(minkowski, origin, grid, [("fixed-t", -0.5)], tolerances=tolerances, executor=executor)

        assert cone_slice.coverage.all(), "Every ray should reach t = -0.5."
        assert round_ratio(minkowski, cone_slice) == pytest.approx(1.0, abs=1e-9), "Slice should be round."
        assert cone_slice.area == pytest.approx(0.25 * grid_polyhedron_area(2), rel=1e-8), "Area must scale with t^2."

    def test_fixed_s_levels_and_summary(self, minkowski, origin, tolerances, executor):
        """
        Test fixed-s slices and their summaries.

        Ensures areas grow like s^2 and the summary carries the level.
        """
        grid = icosphere(1)
        fan = trace_fan(minkowski, origin, grid, 1.0, tolerances, executor=executor)
        slices = exponential_map(minkowski, origin, grid, [("fixed-s", 0.25), ("fixed-s", 0.5)], fan=fan)

        assert slices[1].area / slices[0].area == pytest.approx(4.0, rel=1e-8), "Area must grow like s^2."
        summary = slices[0].summary()
        assert summary.kind == "fixed-s" and summary.level == 0.25, "Summary lost its level."
        assert summary.coverage == 1.0, "Full coverage expected."

    def test_levels_beyond_reach_are_uncovered(self, minkowski, origin, tolerances, executor):
        """
        Test a fixed-t level below the traced depth.

        Ensures the slice reports no coverage instead of extrapolating.
        """
        grid = icosphere(0)
        fan = trace_fan(minkowski, origin, grid, 0.5, tolerances, executor=executor)
        (cone_slice,) = exponential_map(minkowski, origin, grid, [("fixed-t", -1.0)], fan=fan)

        assert not cone_slice.coverage.any(), "No ray reaches t = -1 within s = 0.5."
        assert cone_slice.area == 0.0, "Uncovered slice has no area."


@pytest.mark.slow
class TestConjugacy:
    def test_flat_metric_has_no_conjugate_points(self, minkowski, origin, tolerances, executor):
        """
        Test the conjugacy radius of Minkowski space.

        Ensures s* is beyond the horizon.
        """
        s_star, rows, excluded = conjugacy_radius(minkowski, origin, icosphere(1), 1.5, tolerances, executor=executor)

        assert isinstance(s_star, Beyond), f"Expected no conjugate point, got {s_star}."
        assert not excluded, "No ray should fail."
        assert len(rows) == 42, "One row per direction."

    def test_cylinder_conjugate_radius(self, cylinder, equator, executor):
        """
        Test the conjugacy radius on R x S^2 x R with a unit sphere.

        Ensures equatorial generators refocus at s* = pi.
        """
        tolerances = TolerancesSchema(rtol=1e-9, atol=1e-11)
        s_star, _, _ = conjugacy_radius(cylinder, equator, icosphere(1), 3.5, tolerances, executor=executor)

        assert not isinstance(s_star, Beyond), "A conjugate point must be found below s = 3.5."
        assert s_star == pytest.approx(math.pi, rel=1e-3), f"Expected s* = pi, got {s_star}."
