import logging
from dataclasses import dataclass

import numpy as np

from exceptions import FrameDegeneracyError, FrameDriftError
from frames import NullFrame, conjugate_null_vector, unit_normal
from geodesics import NullGeodesic, RayFan, SphereGrid, exponential_map
from geodesics.integrator import DJ1, DJ2, E1, E2, J1, J2, PHI, PSI, V
from metric import MetricField, SpacetimePoint, connection


logger = logging.getLogger(__name__)


@dataclass
class LeafSample:
    """Leaf frame and connection coefficients of the geodesic foliation at one point of a ray."""

    s: float
    point: SpacetimePoint
    n: float
    g4: np.ndarray
    gamma: np.ndarray
    dn: np.ndarray
    frame: NullFrame
    transported: np.ndarray
    transverse: np.ndarray
    chi: np.ndarray
    zeta: np.ndarray
    phi: float
    psi: np.ndarray
    phi_transport: float
    psi_transport: np.ndarray
    frame_residual: float
    state: np.ndarray

    @property
    def trchi(self) -> float:
        return float(np.trace(self.chi))

    @property
    def chihat(self) -> np.ndarray:
        symmetric = 0.5 * (self.chi + self.chi.T)
        return symmetric - 0.5 * np.trace(symmetric) * np.eye(2)

    @property
    def chihat_norm(self) -> float:
        return float(np.sqrt(np.sum(self.chihat**2)))

    @property
    def area_density(self) -> float:
        return float(abs(np.linalg.det(self.transverse)))

    @property
    def T(self) -> np.ndarray:
        return unit_normal(self.n)


def leaf_sample(metric: MetricField, ray: NullGeodesic, s: float) -> LeafSample:
    """
    Leaf frame e_a = A^-1 J from the Jacobi fields, with chi = A^-1 B and zeta.

    A_cb = g(J_c, e_b^pt), B_cb = g(D_s J_c, e_b^pt), zeta_a = 1/2 (A^-1)_ac g(D_s J_c, Lbar).
    """
    if not ray.extended:
        raise FrameDegeneracyError("Leaf geometry needs a ray integrated with Jacobi fields.")
    if s <= 0.0:
        raise FrameDegeneracyError("The leaf frame is singular at the vertex.")
    y, chart_id = ray.state(s)
    jet, g4, gamma, _ = connection(metric, y[0], y[1:4], chart_id)
    n = float(jet.n)
    v = y[V]
    jacobi = np.stack([y[J1], y[J2]])
    jacobi_dot = np.stack([y[DJ1], y[DJ2]])
    transported = np.stack([y[E1], y[E2]])
    covariant = jacobi_dot + np.einsum("abc,b,kc->ka", gamma, v, jacobi)

    A = jacobi @ g4 @ transported.T
    B = covariant @ g4 @ transported.T
    try:
        A_inv = np.linalg.inv(A)
    except np.linalg.LinAlgError as e:
        raise FrameDegeneracyError(f"Jacobi fields are degenerate at s = {s:.6g}.") from e

    leaf = A_inv @ jacobi
    T = unit_normal(n)
    Lbar = conjugate_null_vector(g4, T, v, leaf)
    chi = A_inv @ B
    zeta = 0.5 * A_inv @ (covariant @ g4 @ Lbar)

    gram = transported @ g4 @ transported.T
    frame_residual = max(float(np.max(np.abs(gram - np.eye(2)))), float(np.max(np.abs(transported @ g4 @ v))))
    point = SpacetimePoint.of(y[0], y[1:4], chart_id)
    return LeafSample(
        s=float(s),
        point=point,
        n=n,
        g4=g4,
        gamma=gamma,
        dn=jet.dn,
        frame=NullFrame(L=v.copy(), Lbar=Lbar, e1=leaf[0], e2=leaf[1], base=point),
        transported=transported,
        transverse=A,
        chi=chi,
        zeta=zeta,
        phi=1.0 / float(v @ g4 @ T),
        psi=leaf @ g4 @ T,
        phi_transport=float(y[PHI]),
        psi_transport=y[PSI].copy(),
        frame_residual=frame_residual,
        state=y,
    )


@dataclass
class RicciCoefficients:
    s: np.ndarray
    trchi: np.ndarray
    chihat: np.ndarray
    chihat_norm: np.ndarray
    zeta: np.ndarray
    chi_asymmetry: np.ndarray


def ricci_coefficients(metric: MetricField, ray: NullGeodesic, s_values, frame_tol: float = 1e-8) -> RicciCoefficients:
    """tr chi, chihat and zeta along a ray; FrameDriftError when the transported pair loses orthonormality."""
    samples = []
    for s in np.asarray(s_values, dtype=float):
        sample = leaf_sample(metric, ray, s)
        if sample.frame_residual > frame_tol:
            raise FrameDriftError(
                f"Ray {ray.omega_index}: transported frame residual {sample.frame_residual:.3g} at s = {s:.6g}."
            )
        samples.append(sample)
    return RicciCoefficients(
        s=np.array([sample.s for sample in samples]),
        trchi=np.array([sample.trchi for sample in samples]),
        chihat=np.array([sample.chihat for sample in samples]),
        chihat_norm=np.array([sample.chihat_norm for sample in samples]),
        zeta=np.array([sample.zeta for sample in samples]),
        chi_asymmetry=np.array([abs(sample.chi[0, 1] - sample.chi[1, 0]) for sample in samples]),
    )


@dataclass
class LeafGeometry:
    s_level: float
    area: float
    r_of_s: float
    sigma_cells: dict[int, np.ndarray]
    trchi_field: dict[int, float]
    chihat_norm_field: dict[int, float]
    zeta_field: dict[int, np.ndarray]
    phi_field: dict[int, float]
    psi_field: dict[int, np.ndarray]


def leaf_geometry(metric: MetricField, fan: RayFan, s_level: float, grid: SphereGrid | None = None) -> LeafGeometry:
    """
    The leaf S_s: area from the Jacobi area density, r(s) = sqrt(area / 4 pi), and per-ray fields.

    Per-cell induced metrics come from neighbouring rays, as on exponential-map slices.
    """
    grid = grid or fan.grid
    samples = {}
    for i, ray in enumerate(fan.rays):
        if ray is None or ray.s_end < s_level:
            continue
        samples[i] = leaf_sample(metric, ray, s_level)
    if not samples:
        raise FrameDegeneracyError(f"No ray reaches s = {s_level:.6g}.")
    weights = grid.areas[list(samples)]
    densities = np.array([sample.area_density for sample in samples.values()])
    # uncovered directions are filled with the covered mean density
    area = float(np.sum(weights * densities) * grid.areas.sum() / weights.sum())
    cone_slice = exponential_map(metric, fan.base, grid, [("fixed-s", s_level)], fan=fan)[0]
    return LeafGeometry(
        s_level=s_level,
        area=area,
        r_of_s=float(np.sqrt(area / (4.0 * np.pi))),
        sigma_cells=cone_slice.cell_metrics,
        trchi_field={i: sample.trchi for i, sample in samples.items()},
        chihat_norm_field={i: sample.chihat_norm for i, sample in samples.items()},
        zeta_field={i: sample.zeta for i, sample in samples.items()},
        phi_field={i: sample.phi for i, sample in samples.items()},
        psi_field={i: sample.psi for i, sample in samples.items()},
    )
