import logging
from dataclasses import dataclass, field

import numpy as np

from exceptions import DegenerateMetricError
from metric.interfaces import MetricField, MetricJet, SpacetimePoint
from metric.norms import orthonormal_triad


logger = logging.getLogger(__name__)


@dataclass
class MetricSample:
    """Pointwise geometry at one point, or at a batch of points (leading axes)."""

    point: SpacetimePoint | None
    n: np.ndarray
    dn: np.ndarray
    ddn: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    k: np.ndarray
    g4: np.ndarray
    g4_inv: np.ndarray
    christoffel4: np.ndarray
    christoffel_derivative: np.ndarray
    riemann: np.ndarray
    provider: dict = field(default_factory=dict)


@dataclass
class DeformationSample:
    pi00: float
    pi0i: np.ndarray
    piij: np.ndarray
    pointwise_norm: float


def spacetime_metric(jet: MetricJet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Assemble g_ab, d_m g_ab and d_m d_n g_ab of the block metric -n^2 dt^2 + g_ij dx^i dx^j."""
    n = jet.n
    shape = n.shape
    g4 = np.zeros(shape + (4, 4))
    g4[..., 0, 0] = -(n**2)
    g4[..., 1:, 1:] = jet.g

    dg4 = np.zeros(shape + (4, 4, 4))
    dg4[..., :, 0, 0] = -2.0 * n[..., None] * jet.dn
    dg4[..., :, 1:, 1:] = jet.dg

    ddg4 = np.zeros(shape + (4, 4, 4, 4))
    ddg4[..., :, :, 0, 0] = -2.0 * (jet.dn[..., :, None] * jet.dn[..., None, :] + n[..., None, None] * jet.ddn)
    ddg4[..., :, :, 1:, 1:] = jet.ddg
    return g4, dg4, ddg4


def lowered_christoffel(dg4: np.ndarray) -> np.ndarray:
    """Gamma_{l b c} = 1/2 (d_b g_lc + d_c g_lb - d_l g_bc) with dg4[..., m, a, b] = d_m g_ab."""
    return 0.5 * (
        np.einsum("...blc->...lbc", dg4) + np.einsum("...clb->...lbc", dg4) - dg4
    )


def christoffel(g4_inv: np.ndarray, dg4: np.ndarray) -> np.ndarray:
    return np.einsum("...al,...lbc->...abc", g4_inv, lowered_christoffel(dg4))


def christoffel_derivative(g4_inv: np.ndarray, dg4: np.ndarray, ddg4: np.ndarray) -> np.ndarray:
    """Return dGamma[..., m, a, b, c] = d_m Gamma^a_{bc}."""
    lowered = lowered_christoffel(dg4)
    d_inv = -np.einsum("...ak,...mkl,...lb->...mab", g4_inv, dg4, g4_inv)
    d_lowered = 0.5 * (
        np.einsum("...mblc->...mlbc", ddg4) + np.einsum("...mclb->...mlbc", ddg4) - ddg4
    )
    return np.einsum("...mal,...lbc->...mabc", d_inv, lowered) + np.einsum("...al,...mlbc->...mabc", g4_inv, d_lowered)


def riemann_tensor(g4: np.ndarray, gamma: np.ndarray, d_gamma: np.ndarray) -> np.ndarray:
    """
    R_{rsmn} = g_{rl} (d_m Gamma^l_{ns} - d_n Gamma^l_{ms} + Gamma^l_{mk} Gamma^k_{ns} - Gamma^l_{nk} Gamma^k_{ms}).

    The round unit sphere has R_{th ph th ph} = sin^2 th in this convention.
    """
    derivative_part = np.einsum("...mrns->...rsmn", d_gamma)
    product_part = np.einsum("...rmk,...kns->...rsmn", gamma, gamma)
    mixed = derivative_part + product_part
    r_up = mixed - np.swapaxes(mixed, -1, -2)
    return np.einsum("...rl,...lsmn->...rsmn", g4, r_up)


def second_fundamental_form_from_jet(jet: MetricJet) -> np.ndarray:
    """k_ij = -(2/n) d_t g_ij."""
    return -2.0 * jet.dg[..., 0, :, :] / jet.n[..., None, None]


def check_nondegenerate(jet: MetricJet) -> None:
    if np.any(jet.n <= 0.0):
        raise DegenerateMetricError("Lapse is not positive.")
    eigenvalues = np.linalg.eigvalsh(jet.g)
    if np.any(eigenvalues <= 0.0):
        raise DegenerateMetricError(f"Spatial metric is not positive definite (min eigenvalue {eigenvalues.min():.3g}).")


def assemble(jet: MetricJet, point: SpacetimePoint | None = None) -> MetricSample:
    check_nondegenerate(jet)
    g4, dg4, ddg4 = spacetime_metric(jet)
    g4_inv = np.linalg.inv(g4)
    gamma = christoffel(g4_inv, dg4)
    d_gamma = christoffel_derivative(g4_inv, dg4, ddg4)
    return MetricSample(
        point=point,
        n=jet.n,
        dn=jet.dn,
        ddn=jet.ddn,
        g=jet.g,
        dg=jet.dg,
        d2g=jet.ddg,
        k=second_fundamental_form_from_jet(jet),
        g4=g4,
        g4_inv=g4_inv,
        christoffel4=gamma,
        christoffel_derivative=d_gamma,
        riemann=riemann_tensor(g4, gamma, d_gamma),
        provider=jet.provider,
    )


def sample(metric: MetricField, p: SpacetimePoint) -> MetricSample:
    metric.locate(p)
    jet = metric.jet(p.t, np.asarray(p.x, dtype=float), p.chart_id)
    return assemble(jet, p)


def sample_batch(metric: MetricField, t, x, chart_id: str = "main") -> MetricSample:
    return assemble(metric.jet(t, x, chart_id))


def connection(metric: MetricField, t: float, x: np.ndarray, chart_id: str, with_derivative: bool = False):
    """Christoffel symbols (and optionally their derivatives) without the curvature assembly."""
    jet = metric.jet(t, x, chart_id)
    g4, dg4, ddg4 = spacetime_metric(jet)
    g4_inv = np.linalg.inv(g4)
    gamma = christoffel(g4_inv, dg4)
    if not with_derivative:
        return jet, g4, gamma, None
    return jet, g4, gamma, christoffel_derivative(g4_inv, dg4, ddg4)


def second_fundamental_form(metric: MetricField, p: SpacetimePoint) -> np.ndarray:
    metric.locate(p)
    return second_fundamental_form_from_jet(metric.jet(p.t, np.asarray(p.x, dtype=float), p.chart_id))


def deformation_from_sample(s: MetricSample) -> DeformationSample:
    pi0i = s.dn[..., 1:] / s.n[..., None]
    piij = -2.0 * s.k
    triad = orthonormal_triad(s.g)
    frame_0i = np.einsum("...ji,...j->...i", triad, pi0i)
    frame_ij = np.einsum("...ai,...ab,...bj->...ij", triad, piij, triad)
    norm = np.sqrt(2.0 * np.sum(frame_0i**2, axis=-1) + np.sum(frame_ij**2, axis=(-2, -1)))
    return DeformationSample(pi00=0.0, pi0i=pi0i, piij=piij, pointwise_norm=norm)


def deformation_tensor(metric: MetricField, p: SpacetimePoint) -> DeformationSample:
    deformation = deformation_from_sample(sample(metric, p))
    deformation.pointwise_norm = float(deformation.pointwise_norm)
    return deformation


def normal_covariant_derivative(n: np.ndarray, dn: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """D_a T_b for the unit normal T = n^-1 d_t, whose covariant components are (-n, 0, 0, 0)."""
    dt = n[..., None, None] * gamma[..., 0, :, :]
    dt[..., :, 0] -= dn
    return dt


def geometric_deformation(n: np.ndarray, dn: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """pi_ab = D_a T_b + D_b T_a, the Lie derivative of g along T."""
    dt = normal_covariant_derivative(n, dn, gamma)
    return dt + np.swapaxes(dt, -1, -2)


def curvature_audit(s: MetricSample) -> dict[str, float]:
    """Algebraic residuals of the curvature tensor, scaled by its largest component."""
    r = s.riemann
    scale = max(float(np.max(np.abs(r))), 1.0)
    bianchi = r + np.einsum("...acdb->...abcd", r) + np.einsum("...adbc->...abcd", r)
    ricci = np.einsum("...ac,...abcd->...bd", s.g4_inv, r)
    return {
        "antisymmetry_first": float(np.max(np.abs(r + np.swapaxes(r, -4, -3)))) / scale,
        "antisymmetry_second": float(np.max(np.abs(r + np.swapaxes(r, -2, -1)))) / scale,
        "pair_symmetry": float(np.max(np.abs(r - np.einsum("...abcd->...cdab", r)))) / scale,
        "first_bianchi": float(np.max(np.abs(bianchi))) / scale,
        "ricci": float(np.max(np.abs(ricci))) / scale,
        "christoffel_symmetry": float(
            np.max(np.abs(s.christoffel4 - np.swapaxes(s.christoffel4, -1, -2)))
        ),
    }
