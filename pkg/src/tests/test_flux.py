import numpy as np
import pytest

from exceptions import DeltaBeyondInjectivityError, FrameDegeneracyError
from flux import (
    OrderStudy,
    flux_ladder,
    foliation_scalars,
    ladder_quadrature,
    leaf_geometry,
    reduced_flux,
    ricci_coefficients,
    smallness_monitor,
    t_foliation_consistency,
    trchi_deviation,
    transport_order,
)
from geodesics import JacobiState, icosphere, integrate_geodesic, jacobi_propagate, trace_fan
from metric import LapseBump, SpacetimePoint
from services.verify import ORDER_FLOOR, order_row


@pytest.mark.unit
class TestLadderQuadrature:
    def test_weights_integrate_cubics(self):
        """
        Test the Simpson weights of a delta ladder.

        Ensures each row integrates s^2 exactly from the floor to its delta.
        """
        deltas = [0.1, 0.2, 0.4]
        nodes, weights = ladder_quadrature(1e-3, deltas, 8)

        for k, delta in enumerate(deltas):
            exact = (delta**3 - 1e-9) / 3.0
            assert weights[k] @ nodes**2 == pytest.approx(exact, rel=1e-12), f"Row {k} does not integrate s^2."

    def test_weights_are_nested(self):
        """
        Test the ordering of the ladder rows.

        Ensures weights are nonnegative and never decrease along the ladder.
        """
        _, weights = ladder_quadrature(1e-3, [0.1, 0.2, 0.4], 5)

        assert np.all(weights >= 0.0), "Weights must be nonnegative."
        assert np.all(np.diff(weights, axis=0) >= 0.0), "Rows must be nested."

    @pytest.mark.parametrize("s_floor, deltas", [(0.2, [0.1, 0.3]), (1e-3, [])])
    def test_invalid_floor(self, s_floor, deltas):
        """
        Test a floor above the first ladder value and an empty ladder.

        Ensures a ValueError is raised.
        """
        with pytest.raises(ValueError):
            ladder_quadrature(s_floor, deltas, 8)


@pytest.mark.unit
class TestFluxLadder:
    def test_minkowski_flux_vanishes(self, minkowski, origin, tolerances, executor):
        """
        Test the flux ladder on the Minkowski cone.

        Ensures every flux vanishes and the foliation scalars stay trivial.
        """
        report = flux_ladder(
            minkowski, origin, [0.25, 0.5], 1, tolerances, panels=4, executor=executor, check_injectivity=False, with_error_bars=False
        )

        for rung in report.reports:
            assert rung.reduced_flux == pytest.approx(0.0, abs=1e-8), f"Flux at delta = {rung.delta} should vanish."
            assert rung.total_flux == pytest.approx(0.0, abs=1e-8)
        assert report.monotone, "Ladder must be monotone."
        assert report.smallness.improved_ok, "phi = 1 and psi = 0 on flat slices."
        assert report.coercivity.checked_points == 0 and report.coercivity.passed, "Flat cones have no curvature to check."

    def test_lapse_bump_flux(self, lapse_bump, origin, tolerances, executor):
        """
        Test the flux ladder through the bump metric.

        Ensures the reduced flux is positive and monotone and the density split adds up.
        """
        report = flux_ladder(
            lapse_bump, origin, [0.2, 0.4], 1, tolerances, panels=4, executor=executor, check_injectivity=False, with_error_bars=False
        )
        small, large = report.reports

        assert 0.0 < small.reduced_flux <= large.reduced_flux, "Flux must be positive and nondecreasing."
        assert large.total_flux == pytest.approx(large.direct_flux, rel=1e-8), "Split must match the direct contraction."
        assert large.total_flux > 0.0, "Bel-Robinson flux must be positive."
        assert report.coercivity.passed, f"Coercivity failed: {report.coercivity}"

    def test_delta_beyond_injectivity(self, minkowski, origin, tolerances):
        """
        Test a ladder reaching past a known injectivity radius.

        Ensures DeltaBeyondInjectivityError is raised before any ray is traced.
        """
        with pytest.raises(DeltaBeyondInjectivityError):
            reduced_flux(minkowski, origin, 0.5, 1, tolerances, injectivity=0.3)

    def test_trchi_deviation_flat(self, minkowski, origin, tolerances, executor):
        """
        Test the expansion deviation on the Minkowski cone.

        Ensures tr chi = 2 / s and the shear integral vanishes.
        """
        report = trchi_deviation(minkowski, origin, 1, (0.1, 0.4), tolerances, 0.1, panels=4, executor=executor, with_error_bars=False)

        assert report.fan_max_trchi_deviation == pytest.approx(0.0, abs=1e-6), "tr chi must be 2 / s."
        assert report.fan_max_chihat_integral == pytest.approx(0.0, abs=1e-8), "Shear must vanish."
        assert report.within_epsilon0


@pytest.mark.unit
class TestLeafGeometry:
    def test_flat_ricci_coefficients(self, minkowski, origin, tolerances):
        """
        Test the null second fundamental form along a Minkowski generator.

        Ensures tr chi = 2 / s with vanishing shear and torsion.
        """
        ray = integrate_geodesic(minkowski, origin, np.array([0.0, 0.6, 0.8]), 1.0, tolerances, extended=True)
        s_values = np.array([0.1, 0.5, 1.0])
        coefficients = ricci_coefficients(minkowski, ray, s_values)

        assert np.allclose(coefficients.trchi, 2.0 / s_values, rtol=1e-8), "tr chi must be 2 / s."
        assert np.allclose(coefficients.chihat_norm, 0.0, atol=1e-8), "Shear must vanish."
        assert np.allclose(coefficients.zeta, 0.0, atol=1e-8), "Torsion must vanish."
        assert np.max(coefficients.chi_asymmetry) < 1e-8, "chi must be symmetric."

    def test_leaf_needs_jacobi_fields(self, minkowski, origin, tolerances):
        """
        Test leaf quantities on a ray integrated without Jacobi fields.

        Ensures FrameDegeneracyError is raised.
        """
        ray = integrate_geodesic(minkowski, origin, np.array([1.0, 0.0, 0.0]), 1.0, tolerances)

        with pytest.raises(FrameDegeneracyError):
            ricci_coefficients(minkowski, ray, [0.5])

    def test_flat_leaf_area(self, minkowski, origin, tolerances, executor):
        """
        Test the leaf S_s of the Minkowski cone.

        Ensures its area is 4 pi s^2, so r(s) = s.
        """
        fan = trace_fan(minkowski, origin, icosphere(1), 1.0, tolerances, extended=True, executor=executor)
        leaf = leaf_geometry(minkowski, fan, 0.5)

        assert leaf.area == pytest.approx(np.pi, rel=1e-8), "Area must be 4 pi s^2."
        assert leaf.r_of_s == pytest.approx(0.5, rel=1e-8)
        assert all(phi == pytest.approx(1.0) for phi in leaf.phi_field.values()), "phi = 1 on flat slices."

    def test_jacobi_fields_grow_linearly(self, minkowski, origin, tolerances):
        """
        Test Jacobi propagation along a Minkowski generator.

        Ensures det A = s^2 and no conjugate point before the end of the ray.
        """
        ray = integrate_geodesic(minkowski, origin, np.array([0.0, 0.0, 1.0]), 1.0, tolerances)
        state = jacobi_propagate(minkowski, ray, tolerances)

        assert state.along.extended, "The ray must be re-integrated with Jacobi fields."
        assert state.transverse_det(0.5) == pytest.approx(0.25, rel=1e-8), "Expected det A = s^2."
        assert state.first_zero() is None, "Flat generators have no conjugate points."


@pytest.mark.unit
class TestFoliationScalars:
    def test_flat_scalars_are_trivial(self, minkowski, origin, tolerances):
        """
        Test phi and psi along a Minkowski generator.

        Ensures phi = 1, psi = 0 and the smallness monitor reports the improved bound.
        """
        ray = integrate_geodesic(minkowski, origin, np.array([1.0, 0.0, 0.0]), 1.0, tolerances, extended=True)
        state = foliation_scalars(minkowski, ray, [0.0, 0.25, 0.5, 1.0])

        assert np.allclose(state.phi, 1.0), "phi must be 1."
        assert np.allclose(state.psi, 0.0, atol=1e-12), "psi must vanish."
        assert smallness_monitor(state).improved_ok

    def test_transport_matches_definition(self, lapse_bump, tolerances):
        """
        Test the transported foliation scalars through the bump metric.

        Ensures transport and definition agree within the transport tolerance while phi moves off 1.
        """
        p = SpacetimePoint.of(0.0, (0.3, 0.0, 0.0))
        ray = integrate_geodesic(lapse_bump, p, np.array([-0.6, 0.8, 0.0]), 1.0, tolerances, extended=True)
        state = foliation_scalars(lapse_bump, ray, np.linspace(0.1, 1.0, 6))

        assert np.max(state.residual_phi) < tolerances.transport_tol, "phi transport disagrees with its definition."
        assert np.max(state.residual_psi) < tolerances.transport_tol, "psi transport disagrees with its definition."
        assert np.max(np.abs(state.phi - 1.0)) > 0.0, "The bump must tilt the foliation."

    def test_t_foliation_frame_relations(self, minkowski, lapse_bump, origin, tolerances):
        """
        Test the primed frame adapted to the t-foliation.

        Ensures every relation closes on Minkowski and the algebraic ones close under the bump.
        """
        flat_ray = integrate_geodesic(minkowski, origin, np.array([0.0, 1.0, 0.0]), 1.0, tolerances, extended=True)
        flat = t_foliation_consistency(minkowski, flat_ray, 0.5)

        assert max(flat.values()) < 1e-8, f"Flat frame relations failed: {flat}"

        p = SpacetimePoint.of(0.0, (0.3, 0.0, 0.0))
        ray = integrate_geodesic(lapse_bump, p, np.array([-0.6, 0.8, 0.0]), 1.0, tolerances, extended=True)
        bump = t_foliation_consistency(lapse_bump, ray, 0.5)

        assert bump["chi"] < 1e-6, "chi must not depend on the tilt of the leaf frame."
        assert bump["normal_norm"] < 1e-6, "The rebuilt normal must have unit length."


@pytest.mark.unit
class TestStepHalving:
    def test_residuals_shrink_with_step(self, tolerances):
        """
        Test fixed-step integrations of one ray through a strong lapse bump.

        Ensures the transport and null residuals shrink at least 8x per step halving.
        """
        metric = LapseBump((-2.0, 0.0), amplitude=0.2, width=0.5)
        p = SpacetimePoint.of(0.0, (0.3, 0.0, 0.0))
        steps = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]

        study = transport_order(metric, p, np.array([-0.6, 0.8, 0.0]), 0.5, steps)

        assert study.steps == steps
        assert study.transport[0] > ORDER_FLOOR, f"Coarsest transport residual {study.transport[0]} is at round-off."
        assert study.null[0] > ORDER_FLOOR, f"Coarsest null residual {study.null[0]} is at round-off."
        transport = order_row("transport", "", study.steps, study.transport)
        null = order_row("null", "", study.steps, study.null)
        assert transport.verdict == "pass", f"Transport residuals {study.transport} do not converge at order 3 or more."
        assert null.verdict == "pass", f"Null residuals {study.null} do not converge at order 3 or more."

    def test_ratios(self):
        """
        Test the halving ratios of a residual sequence.

        Ensures consecutive quotients, with an infinite ratio once the residual vanishes.
        """
        assert OrderStudy.ratios([1.6e-3, 1e-4, 0.0]) == pytest.approx([16.0, np.inf])


@pytest.mark.unit
class TestCylinderLeaf:
    @pytest.mark.parametrize("tilt", [0.0, np.pi / 6.0])
    def test_closed_form_along_sphere_rays(self, cylinder, equator, tolerances, tilt):
        """
        Test det A and tr chi on R x S^2(1) x R for a ray with sphere fraction c.

        Ensures det A = s sin(c s) / c and tr chi = 1/s + c cot(c s) up to the first conjugate point.
        """
        c = np.cos(tilt)
        omega = np.array([0.0, c, np.sin(tilt)])
        s_end = 0.9 * np.pi / c
        ray = integrate_geodesic(cylinder, equator, omega, s_end, tolerances, extended=True)
        state = JacobiState(metric=cylinder, along=ray)
        s_values = np.linspace(0.2, s_end, 9)

        coefficients = ricci_coefficients(cylinder, ray, s_values)

        for s, trchi in zip(s_values, coefficients.trchi):
            assert state.transverse_det(s) == pytest.approx(s * np.sin(c * s) / c, abs=1e-6), f"det A off at s = {s}."
            assert trchi == pytest.approx(1.0 / s + c / np.tan(c * s), rel=1e-6, abs=1e-7), f"tr chi off at s = {s}."

    def test_first_conjugate_point(self, cylinder, equator, tolerances):
        """
        Test the conjugate point of an equatorial ray on R x S^2(1) x R.

        Ensures det A first vanishes at s = pi.
        """
        ray = integrate_geodesic(cylinder, equator, np.array([0.0, 1.0, 0.0]), 3.5, tolerances, extended=True)

        assert JacobiState(metric=cylinder, along=ray).first_zero() == pytest.approx(np.pi, abs=1e-6)


@pytest.mark.slow
class TestCylinderFlux:
    def test_two_grid_stability_and_oracle(self, cylinder, equator, tolerances, executor):
        """
        Test the flux ladder of the cylinder cone on two grid levels.

        Ensures the split density matches the dense contraction and R(delta) moves less than 1% under refinement.
        """
        report = flux_ladder(
            cylinder, equator, [0.5, 1.0], 2, tolerances, panels=4, executor=executor, check_injectivity=False
        )

        for rung in report.reports:
            assert rung.total_flux == pytest.approx(rung.direct_flux, rel=1e-6), f"Oracle mismatch at delta = {rung.delta}."
            assert rung.positivity_margin >= -1e-9, f"Negative flux density at delta = {rung.delta}."
        assert report.monotone, "Ladder must be monotone."
        bar = report.error_bars["reduced_flux"]
        assert bar.value > 0.0, "Curved cylinder cone must carry flux."
        assert bar.error == pytest.approx(abs(bar.value - bar.coarse_value))
        assert bar.error <= 1e-2 * bar.value, f"Reduced flux moved by {bar.error / bar.value:.3%} under refinement."
