import numpy as np
import pytest

from exceptions import NonTimelikeTError
from frames import (
    NullFrame,
    bel_robinson_audit,
    bel_robinson_density,
    curvature_from_electric_magnetic,
    electric_magnetic,
    frame_audit,
    hodge_dual,
    initial_null_vector,
    null_decomposition,
    null_frame,
    principal_density,
    spacetime_metric_at,
    weyl_tensor,
)
from metric import SpacetimePoint, sample


def traceless_symmetric(seed: int) -> np.ndarray:
    a = np.random.default_rng(seed).normal(size=(3, 3))
    a = a + a.T
    return a - np.trace(a) / 3.0 * np.eye(3)


@pytest.mark.unit
class TestNullFrame:
    @pytest.mark.parametrize("omega", [(1.0, 0.0, 0.0), (0.0, 0.6, 0.8), (-0.48, 0.6, 0.64)])
    def test_initial_null_vector(self, lapse_bump, omega):
        """
        Test the initial null vector at a point of the bump metric.

        Ensures it is null, past directed and normalized by g(l, T) = 1.
        """
        p = SpacetimePoint.of(-0.5, (0.2, 0.1, 0.0))
        n, _, g4 = spacetime_metric_at(lapse_bump, p)
        ell = initial_null_vector(lapse_bump, p, np.array(omega))
        T = np.array([1.0 / n, 0.0, 0.0, 0.0])

        assert abs(ell @ g4 @ ell) < 1e-14, "Initial vector is not null."
        assert ell[0] < 0.0, "Initial vector must be past directed."
        assert ell @ g4 @ T == pytest.approx(1.0), "Expected g(l, T) = 1."

    def test_non_unit_direction(self, minkowski, origin):
        """
        Test the initial null vector with a direction that is not a unit vector.

        Ensures a ValueError is raised.
        """
        with pytest.raises(ValueError):
            initial_null_vector(minkowski, origin, np.array([1.0, 1.0, 0.0]))

    def test_frame_relations(self, cylinder, equator):
        """
        Test completing a null vector to a frame on the cylinder.

        Ensures every orthonormality relation of (L, Lbar, e1, e2) holds to rounding.
        """
        _, _, g4 = spacetime_metric_at(cylinder, equator)
        omega = np.array([0.0, 0.6, 0.8])
        frame = null_frame(cylinder, equator, initial_null_vector(cylinder, equator, omega))
        audit = frame_audit(frame, g4)

        for name in ("LL", "LbarLbar", "LLbar", "Le1", "Le2", "Lbare1", "Lbare2", "e1e1", "e2e2"):
            assert audit[name] < 1e-12, f"Frame relation {name} has residual {audit[name]}."


@pytest.mark.unit
class TestCurvature:
    def test_electric_magnetic_inversion(self):
        """
        Test rebuilding a Weyl field from an (E, H) pair in an orthonormal frame.

        Ensures the electric and magnetic parts of the rebuilt field are the inputs.
        """
        E, H = traceless_symmetric(1), traceless_symmetric(2)
        g4 = np.diag([-1.0, 1.0, 1.0, 1.0])
        weyl = curvature_from_electric_magnetic(E, H)
        fields = electric_magnetic(weyl, g4, g4, np.asarray(1.0), np.eye(3))

        assert np.allclose(fields.E, E, atol=1e-12), "Electric part was not recovered."
        assert np.allclose(np.abs(fields.H), np.abs(H), atol=1e-12), "Magnetic part was not recovered."

    def test_weyl_tensor_is_traceless(self, lapse_bump):
        """
        Test the Weyl part of the bump curvature.

        Ensures every trace of the Weyl tensor vanishes.
        """
        s = sample(lapse_bump, SpacetimePoint.of(-0.5, (0.3, -0.2, 0.1)))
        weyl = weyl_tensor(s.riemann, s.g4, s.g4_inv)
        trace = np.einsum("ac,abcd->bd", s.g4_inv, weyl)

        assert np.max(np.abs(trace)) < 1e-12, "Weyl tensor must be traceless."

    def test_bel_robinson_properties(self):
        """
        Test the Bel-Robinson tensor of a synthetic Weyl field.

        Ensures it is symmetric and traceless, Q(T, T, T, T) = |E|^2 + |H|^2, and every frame
        component is bounded by four times that energy.
        """
        g4 = np.diag([-1.0, 1.0, 1.0, 1.0])
        weyl = curvature_from_electric_magnetic(traceless_symmetric(3), traceless_symmetric(4))
        audit = bel_robinson_audit(weyl, g4, g4, 1.0, np.eye(3))

        assert audit["symmetry"] < 1e-12, "Bel-Robinson tensor is not symmetric."
        assert audit["trace"] < 1e-12, "Bel-Robinson tensor is not traceless."
        assert audit["Q_TTTT"] == pytest.approx(audit["energy"], rel=1e-12), "Q(T, T, T, T) must be the energy."
        assert audit["component_bound_ok"], "Frame components exceed four times the energy."

    def test_density_split_is_exact(self):
        """
        Test the principal and remainder split of -Q(T, T, T, L).

        Ensures the principal density is nonnegative and the split adds up to the direct contraction.
        """
        p = SpacetimePoint.of(0.0, (0.0, 0.0, 0.0))
        g4 = np.diag([-1.0, 1.0, 1.0, 1.0])
        weyl = curvature_from_electric_magnetic(traceless_symmetric(5), traceless_symmetric(6))
        dual = hodge_dual(weyl, g4, g4)
        L = np.array([-1.0, 0.0, 0.0, 1.0])
        Lbar = np.array([-1.0, 0.0, 0.0, -1.0])
        frame = NullFrame(L=L, Lbar=Lbar, e1=np.array([0.0, 1.0, 0.0, 0.0]), e2=np.array([0.0, 0.0, 1.0, 0.0]), base=p)
        components = null_decomposition(weyl, frame, g4, dual)
        density = bel_robinson_density(components, 1.02, np.array([0.01, -0.02]), frame, weyl, dual, g4)

        assert principal_density(components) >= 0.0, "Principal density must be nonnegative."
        assert density.total == pytest.approx(density.direct, rel=1e-10), "Split does not add up to -Q(T, T, T, L)."

    def test_non_timelike_reconstruction(self):
        """
        Test the density with a foliation pair that does not rebuild a unit timelike T.

        Ensures NonTimelikeTError is raised.
        """
        p = SpacetimePoint.of(0.0, (0.0, 0.0, 0.0))
        g4 = np.diag([-1.0, 1.0, 1.0, 1.0])
        weyl = curvature_from_electric_magnetic(traceless_symmetric(7), traceless_symmetric(8))
        dual = hodge_dual(weyl, g4, g4)
        # g(L, Lbar) = -4 breaks the frame normalization
        frame = NullFrame(
            L=np.array([-1.0, 0.0, 0.0, 1.0]),
            Lbar=np.array([-2.0, 0.0, 0.0, -2.0]),
            e1=np.array([0.0, 1.0, 0.0, 0.0]),
            e2=np.array([0.0, 0.0, 1.0, 0.0]),
            base=p,
        )
        components = null_decomposition(weyl, frame, g4, dual)

        with pytest.raises(NonTimelikeTError):
            bel_robinson_density(components, 1.0, np.zeros(2), frame, weyl, dual, g4)
