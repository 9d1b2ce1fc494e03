import math

import numpy as np
import pytest

from energy import (
    counted_volume,
    graph_distances,
    gronwall_check,
    l2_curvature,
    metric_equivalence,
    radius_ladder,
    slice_energy,
    slice_grid,
    volume_radius,
)
from exceptions import UnboundedDomainError
from geodesics import icosphere
from metric import build_metric
from schemas import MetricSpecSchema

BOX = [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]]


@pytest.mark.unit
class TestSliceGrid:
    def test_periodic_slice(self, flat_torus):
        """
        Test the quadrature of a flat torus slice.

        Ensures the cells cover one period on every axis.
        """
        grid = slice_grid(flat_torus, 0.0, 6)

        assert grid.shape == (6, 6, 6), "Unexpected grid shape."
        assert grid.volume == pytest.approx(1.0), "Torus of period 1 has unit volume."
        assert all(grid.periodic), "Every axis is periodic."

    def test_unbounded_slice(self, minkowski):
        """
        Test a slice of an unbounded chart without a cutoff box.

        Ensures UnboundedDomainError is raised.
        """
        with pytest.raises(UnboundedDomainError):
            slice_grid(minkowski, 0.0, 4)

    def test_flat_energy_vanishes(self, minkowski):
        """
        Test the slice energy of Minkowski space.

        Ensures Q vanishes on a cutoff box.
        """
        grid = slice_grid(minkowski, -0.5, 4, BOX)

        assert grid.volume == pytest.approx(8.0), "Cutoff box volume is wrong."
        assert slice_energy(minkowski, grid) == pytest.approx(0.0, abs=1e-14), "Flat slices carry no energy."

    def test_l2_curvature(self, minkowski, lapse_bump, executor):
        """
        Test the L2 norm of the curvature on a cutoff box.

        Ensures it vanishes on Minkowski and is positive under the lapse bump.
        """
        assert l2_curvature(minkowski, slice_grid(minkowski, 0.0, 4, BOX), executor) == pytest.approx(0.0, abs=1e-12)
        assert l2_curvature(lapse_bump, slice_grid(lapse_bump, 0.0, 4, BOX), executor) > 0.0, "The bump has curvature."


@pytest.mark.unit
class TestGronwall:
    def test_static_energy_is_conserved(self, lapse_bump, flat_budget, executor):
        """
        Test the energy ladder of the static bump metric.

        Ensures Q(t) is constant and the Gronwall bound holds.
        """
        report = gronwall_check(
            lapse_bump, flat_budget, [-1.0, -0.5, 0.0], 6, cutoff_box=BOX, executor=executor, with_error_bars=False
        )
        energies = [row.Q for row in report.ladder]

        assert energies[0] > 0.0, "The bump has curvature."
        assert energies == pytest.approx([energies[0]] * 3, rel=1e-6), "Static energy must be conserved."
        assert report.holds, "Gronwall bound must hold."
        assert report.empirical_constant == 0.0, "No growth means a zero empirical constant."

    def test_perturbed_torus_ladder(self, perturbed_torus, flat_budget, executor):
        """
        Test the Gronwall comparison on the drifting torus over t in [0, 0.5].

        Ensures the verdict agrees with the ladder rows and the empirical constant, and survives a grid refinement.
        """
        reports = {
            resolution: gronwall_check(
                perturbed_torus, flat_budget, [0.0, 0.25, 0.5], resolution, executor=executor, with_error_bars=False
            )
            for resolution in (6, 12)
        }

        for resolution, report in reports.items():
            rows = report.ladder
            q0 = rows[0].Q
            assert q0 > 0.0, "The lapse ripple has curvature at t = 0."
            assert rows[0].pi_integral == 0.0 and rows[0].gronwall_bound == pytest.approx(q0)
            assert all(b.pi_integral > a.pi_integral for a, b in zip(rows[:-1], rows[1:])), "Drifting slices deform."
            below = all(row.Q <= row.gronwall_bound * (1.0 + 1e-9) + 1e-9 * q0 for row in rows)
            assert report.holds == below, f"Verdict disagrees with the ladder at resolution {resolution}."
            if report.holds:
                assert report.empirical_constant <= report.budget_constant + 1e-6
            else:
                assert report.empirical_constant > report.budget_constant
        assert reports[6].holds == reports[12].holds, "Refinement flipped the Gronwall verdict."

    def test_error_bar_from_coarser_grid(self, lapse_bump, flat_budget, executor):
        """
        Test the resolution error bar of the energy ladder.

        Ensures the coarse value is recorded next to the fine one.
        """
        report = gronwall_check(lapse_bump, flat_budget, [-1.0, 0.0], 4, cutoff_box=BOX, executor=executor)

        assert "Q" in report.error_bars, "Missing energy error bar."
        assert report.error_bars["Q"].coarse_value is not None

    def test_metric_equivalence_on_shrinking_slices(self, flat_budget):
        """
        Test the metric equivalence constant of g = exp(-t) delta on [-1, 0].

        Ensures the measured constant is e and stays below the prediction.
        """
        metric = build_metric(MetricSpecSchema(family="exponential", params={"rate": 0.5}, interval=(-1.0, 0.0)))
        budget = flat_budget.model_copy(update={"I0": 3.0})
        report = metric_equivalence(metric, budget, [-1.0, -0.5, 0.0], 3, cutoff_box=BOX)

        assert report.initial_constant == pytest.approx(math.e), "Initial constant should be e."
        assert report.empirical_constant == pytest.approx(math.e), "Largest eigenvalue is e at t = -1."
        assert report.passed, f"Equivalence should hold: {report}"


@pytest.mark.unit
class TestVolumeRadius:
    def test_radius_ladder(self):
        """
        Test the geometric radius ladder.

        Ensures constant ratios 2^(1/m) and a top rung not above rho.
        """
        ladder = radius_ladder(1.0, 0.5, 4)

        assert np.allclose(ladder[1:] / ladder[:-1], 2.0**0.25), "Rungs must be geometric."
        assert ladder[-1] == pytest.approx(0.5), "Top rung should be rho."
        assert ladder[0] == pytest.approx(2.0**-6), "Ladder starts six octaves down."

    def test_flat_polar_volume(self, minkowski, tolerances, executor):
        """
        Test the volume radius of a Minkowski slice.

        Ensures polar shooting gives |B_r| / r^3 = 4 pi / 3 on every rung.
        """
        report = volume_radius(minkowski, 0.0, [[0.0, 0.0, 0.0]], 0.5, tolerances, grid=icosphere(1), executor=executor)
        (point,) = report.points

        assert all(row.method == "polar" for row in point.ladder), "Flat balls never reach a cut point."
        assert point.r_vol == pytest.approx(4.0 * math.pi / 3.0, rel=1e-4), "Euclidean ball ratio expected."
        assert report.slice_infimum == point.r_vol

    def test_torus_counting_volume(self, flat_torus):
        """
        Test the counted volume of a ball wrapping the unit torus.

        Ensures the ball of radius 0.6 loses six caps, |B| ~ 0.798 and |B| / r^3 ~ 3.694.
        """
        grid = slice_grid(flat_torus, 0.0, 24)
        x0 = np.array([0.5, 0.5, 0.5])
        distances = graph_distances(flat_torus, grid, x0)
        volume = counted_volume(grid, distances, 0.6)

        assert volume == pytest.approx(0.7980, rel=1e-2), f"Unexpected ball volume {volume}."
        assert volume / 0.6**3 == pytest.approx(3.694, rel=1e-2)
