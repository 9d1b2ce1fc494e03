import math

import numpy as np
import pytest
from pydantic import ValidationError

from exceptions import DegenerateMetricError, PointOutsideAtlasError, RankUnsupportedError, UnknownMetricFamilyError
from metric import (
    AuditGrid,
    FiniteDifferenceDerivatives,
    LapseBump,
    SpacetimePoint,
    budget_audit,
    build_metric,
    curvature_audit,
    deformation_tensor,
    equivalence_constant,
    geometric_deformation,
    orthonormal_triad,
    riemannian_norm,
    sample,
    sample_batch,
    second_fundamental_form,
)
from schemas import AssumptionBudgetSchema, MetricSpecSchema


@pytest.mark.unit
class TestMetricFactory:
    @pytest.mark.parametrize(
        "family, params",
        [
            ("minkowski", {}),
            ("constant_lapse", {"lapse": 2.0}),
            ("flat_torus", {"period": 1.0}),
            ("lapse_bump", {"amplitude": 0.05}),
            ("exponential", {"rate": 0.5}),
            ("spherical_cylinder", {"radius": 2.0}),
            ("perturbed_torus", {"amplitude": 0.01, "drift": 0.05}),
        ],
    )
    def test_build_every_family(self, family, params):
        """
        Test building each built-in family from a metric spec.

        Ensures the factory returns a field of the requested family with a positive lapse.
        """
        metric = build_metric(MetricSpecSchema(family=family, params=params, interval=(-1.0, 0.0)))
        chart_id = metric.atlas[0].chart_id
        x = np.array([1.0, 0.5, 0.25])

        assert metric.family == family, f"Expected family {family}, got {metric.family}."
        assert metric.interval == (-1.0, 0.0), "Interval was not stored."
        assert float(metric.lapse(-0.5, x, chart_id)) > 0.0, "Lapse must be positive."

    def test_unknown_family(self):
        """
        Test the factory with an unregistered family.

        Ensures UnknownMetricFamilyError lists the known families.
        """
        with pytest.raises(UnknownMetricFamilyError) as error:
            build_metric(MetricSpecSchema(family="kerr"))

        assert "minkowski" in str(error.value), "Error message should list the known families."

    def test_invalid_params(self):
        """
        Test the factory with a parameter the family does not accept.

        Ensures the TypeError is wrapped in UnknownMetricFamilyError.
        """
        with pytest.raises(UnknownMetricFamilyError):
            build_metric(MetricSpecSchema(family="flat_torus", params={"radius": 1.0}))


@pytest.mark.unit
class TestMetricSampling:
    def test_minkowski_is_flat(self, minkowski, origin):
        """
        Test sampling Minkowski space.

        Ensures the metric is the flat block metric and every curvature component vanishes.
        """
        s = sample(minkowski, origin)

        assert np.allclose(s.g4, np.diag([-1.0, 1.0, 1.0, 1.0])), "Expected the flat spacetime metric."
        assert np.allclose(s.christoffel4, 0.0), "Christoffel symbols must vanish."
        assert np.allclose(s.riemann, 0.0), "Riemann tensor must vanish."
        assert deformation_tensor(minkowski, origin).pointwise_norm == 0.0, "Deformation must vanish."

    def test_point_outside_chart(self, cylinder):
        """
        Test sampling a point beyond the polar cut of a chart.

        Ensures PointOutsideAtlasError is raised.
        """
        with pytest.raises(PointOutsideAtlasError):
            sample(cylinder, SpacetimePoint.of(0.0, (0.0, 1.0, 0.0), "A"))

    def test_unknown_chart(self, minkowski):
        """
        Test sampling a point in a chart the atlas does not have.

        Ensures PointOutsideAtlasError is raised.
        """
        with pytest.raises(PointOutsideAtlasError):
            sample(minkowski, SpacetimePoint.of(0.0, (0.0, 0.0, 0.0), "B"))

    def test_degenerate_lapse(self):
        """
        Test a lapse that crosses zero.

        Ensures DegenerateMetricError is raised when sampling.
        """
        metric = LapseBump((-1.0, 0.0), amplitude=-2.0, width=1.0)

        with pytest.raises(DegenerateMetricError):
            sample(metric, SpacetimePoint.of(0.0, (0.0, 0.0, 0.0)))

    def test_curvature_symmetries(self, lapse_bump):
        """
        Test the algebraic symmetries of the sampled Riemann tensor.

        Ensures antisymmetry, pair symmetry and the first Bianchi identity hold to rounding.
        """
        s = sample(lapse_bump, SpacetimePoint.of(-0.5, (0.3, -0.2, 0.1)))
        audit = curvature_audit(s)

        for name in ("antisymmetry_first", "antisymmetry_second", "pair_symmetry", "first_bianchi"):
            assert audit[name] < 1e-12, f"{name} residual {audit[name]} is too large."

    def test_cylinder_sectional_curvature(self, cylinder):
        """
        Test the sphere factor of R x S^2(R) x R.

        Ensures the sectional curvature of the sphere planes is 1 / R^2.
        """
        theta = 1.1
        s = sample(cylinder, SpacetimePoint.of(0.0, (theta, 0.4, 0.0), "A"))
        # R_{theta phi theta phi} = R^2 sin^2 theta for a sphere of radius R
        value = s.riemann[1, 2, 1, 2]

        assert value == pytest.approx(math.sin(theta) ** 2, rel=1e-10), "Sphere curvature does not match."
        assert np.allclose(s.riemann[3], 0.0), "The z direction must be flat."

    def test_finite_differences_match_analytic(self):
        """
        Test the finite-difference derivative provider against analytic jets.

        Ensures fourth-order differences reproduce the lapse derivatives of the bump.
        """
        spec = {"amplitude": 0.05, "width": 1.0, "center": [0.0, 0.0, 0.0]}
        analytic = LapseBump((-1.0, 0.0), **spec)
        numeric = LapseBump((-1.0, 0.0), derivatives=FiniteDifferenceDerivatives(order=4, step_scale=1e-3), **spec)
        x = np.array([0.4, -0.3, 0.2])

        exact = analytic.jet(-0.5, x)
        approx = numeric.jet(-0.5, x)

        assert np.allclose(approx.dn, exact.dn, atol=1e-9), "First lapse derivatives differ."
        assert np.allclose(approx.ddn, exact.ddn, atol=1e-6), "Second lapse derivatives differ."
        assert numeric.provider_record()["provider"] == "finite_difference", "Provider record is wrong."

    def test_exponential_deformation_matches_geometry(self):
        """
        Test the deformation of the shrinking exponential slices.

        Ensures the Lie derivative of g along the unit normal is -k / 2 on the spatial block, with k = -(2/n) d_t g.
        """
        metric = build_metric(MetricSpecSchema(family="exponential", params={"rate": 0.5}, interval=(-1.0, 0.0)))
        s = sample(metric, SpacetimePoint.of(-0.5, (0.1, 0.2, 0.3)))
        pi = geometric_deformation(s.n, s.dn, s.christoffel4)

        assert np.allclose(pi[1:, 1:], -0.5 * s.k, atol=1e-12), "Spatial deformation block does not match -k / 2."
        assert np.allclose(pi[0, 0], 0.0, atol=1e-12), "pi_00 must vanish for a unit normal."

    def test_exponential_second_fundamental_form(self):
        """
        Test k on the exponential slices g = exp(-t) delta.

        Ensures k_ij = -(2/n) d_t g_ij = 2 exp(-t) delta_ij.
        """
        metric = build_metric(MetricSpecSchema(family="exponential", params={"rate": 0.5}, interval=(-1.0, 0.0)))
        k = second_fundamental_form(metric, SpacetimePoint.of(-0.5, (0.0, 0.0, 0.0)))

        assert np.allclose(k, 2.0 * math.exp(0.5) * np.eye(3), rtol=1e-12), "Unexpected second fundamental form."


@pytest.mark.unit
class TestNorms:
    def test_orthonormal_triad(self):
        """
        Test the Gram-Schmidt triad of a non-diagonal metric.

        Ensures the triad is g-orthonormal and upper triangular with a positive diagonal.
        """
        g = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 3.0]])
        triad = orthonormal_triad(g)

        assert np.allclose(triad.T @ g @ triad, np.eye(3), atol=1e-12), "Triad is not orthonormal."
        assert np.allclose(np.tril(triad, -1), 0.0), "Triad must follow coordinate order."
        assert np.all(np.diag(triad) > 0.0), "Orientation must be kept."

    def test_riemannian_norm(self):
        """
        Test the norm of frame components.

        Ensures the Euclidean sum of squares and a rank limit of four.
        """
        assert riemannian_norm(np.array([3.0, 4.0])) == pytest.approx(5.0)
        assert riemannian_norm(np.ones((4, 4, 4, 4))) == pytest.approx(16.0)

        with pytest.raises(RankUnsupportedError):
            riemannian_norm(np.ones((2,) * 5))


@pytest.mark.unit
class TestBudgetAudit:
    def test_flat_torus_passes(self, flat_torus, flat_budget):
        """
        Test the budget audit on the flat torus.

        Ensures every check passes and the measured sups are the flat values.
        """
        nodes = np.stack(np.meshgrid(*(np.linspace(0.0, 1.0, 3),) * 3, indexing="ij"), axis=-1).reshape(-1, 3)
        report = budget_audit(flat_torus, flat_budget, AuditGrid.product([-2.0, -1.0, 0.0], nodes))

        assert report.passed, f"Expected the audit to pass: {report.checks}"
        assert report.sup_lapse == pytest.approx(1.0), "Lapse sup should be 1."
        assert report.sup_deformation == pytest.approx(0.0), "Deformation should vanish."

    def test_lapse_budget_violation(self, flat_budget):
        """
        Test the audit with a lapse above the declared N0.

        Ensures the lapse check fails and the report is marked as failed.
        """
        metric = build_metric(MetricSpecSchema(family="constant_lapse", params={"lapse": 2.0}, interval=(-1.0, 0.0)))
        report = budget_audit(metric, flat_budget, AuditGrid.product([-1.0, 0.0], np.zeros((1, 3))))

        assert not report.checks["lapse_upper"], "Lapse 2 must exceed N0 = 1."
        assert not report.passed, "Audit must fail."

    def test_off_node_bump_is_refined(self, flat_budget):
        """
        Test the audit on a narrow lapse bump centred between grid nodes.

        Ensures the node sup misses the peak and the bounded refinement recovers n = 1 + a.
        """
        metric = LapseBump((-1.0, 0.0), amplitude=0.5, width=0.3, center=(0.37, 0.41, 0.63))
        nodes = np.stack(np.meshgrid(*(np.linspace(0.0, 1.0, 3),) * 3, indexing="ij"), axis=-1).reshape(-1, 3)
        bounds = [(-1.0, 0.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]

        coarse = budget_audit(metric, flat_budget, AuditGrid.product([-1.0, 0.0], nodes))
        refined = budget_audit(metric, flat_budget, AuditGrid.product([-1.0, 0.0], nodes, bounds=bounds))

        assert coarse.sup_lapse < 1.4, f"Node sup unexpectedly close to the peak: {coarse.sup_lapse}"
        assert refined.sup_lapse == pytest.approx(1.5, abs=1e-4), f"Refined sup {refined.sup_lapse} != 1.5"
        assert refined.sup_deformation > coarse.sup_deformation, "Deformation sup was not refined."
        assert not refined.checks["lapse_upper"], "Peak above N0 must fail the lapse check."

    def test_budget_is_not_mutated(self, flat_budget):
        """
        Test that the audit leaves the declared budget untouched.

        Ensures the frozen budget model rejects assignment.
        """
        with pytest.raises(ValidationError):
            flat_budget.N0 = 5.0

        assert isinstance(flat_budget, AssumptionBudgetSchema)
        assert flat_budget.N0 == 1.0, "Budget changed."

    def test_equivalence_constant(self):
        """
        Test the equivalence constant of a diagonal metric.

        Ensures C = max(lambda_max, 1 / lambda_min).
        """
        g = np.diag([0.25, 1.0, 2.0])[None]
        constant, low, high = equivalence_constant(g)

        assert (low, high) == pytest.approx((0.25, 2.0)), "Eigenvalue range is wrong."
        assert constant == pytest.approx(4.0), "Expected C = 1 / 0.25."

    def test_batch_sampling_shapes(self, perturbed_torus):
        """
        Test sampling a batch of points.

        Ensures every tensor keeps the batch axis in front.
        """
        x = np.random.default_rng(0).uniform(0.0, 1.0, size=(5, 3))
        s = sample_batch(perturbed_torus, np.linspace(-0.5, 0.5, 5), x)

        assert s.n.shape == (5,), "Lapse batch shape is wrong."
        assert s.g.shape == (5, 3, 3), "Spatial metric batch shape is wrong."
        assert s.riemann.shape == (5, 4, 4, 4, 4), "Riemann batch shape is wrong."
