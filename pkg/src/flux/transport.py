import logging
from dataclasses import dataclass

import numpy as np

from flux.coefficients import LeafSample, leaf_sample
from geodesics import NullGeodesic, integrate_geodesic
from geodesics.integrator import DJ1, DJ2, J1, J2
from metric import MetricField, SpacetimePoint
from schemas import SmallnessReport, TolerancesSchema


logger = logging.getLogger(__name__)

BOOTSTRAP_BOUND = 1e-2
IMPROVED_BOUND = 1e-3


@dataclass
class TransportState:
    """
    Foliation scalars along one ray, evaluated from their definitions and from transport.

    phi^-1 = g(T, L) and psi_a = g(e_a, T) in the leaf frame. The transported tilt is that of the
    parallel pair e^pt; the leaf tilt adds the L-component c_a of e_a = e^pt_a + c_a L.
    """

    along: NullGeodesic
    s: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    phi_transport: np.ndarray
    psi_transport: np.ndarray
    residual_phi: np.ndarray
    residual_psi: np.ndarray

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.phi - 1.0) + np.linalg.norm(self.psi, axis=-1)


def _transport_pair(sample: LeafSample) -> tuple[float, np.ndarray, np.ndarray]:
    """Definition-evaluated g(e^pt_a, T) and the leaf tilt rebuilt from the transported values."""
    g4, T, L = sample.g4, sample.T, sample.frame.L
    psi_parallel = sample.transported @ g4 @ T
    # c_a = -1/2 g(e_a - e^pt_a, Lbar)
    shift = -0.5 * (sample.frame.leaf - sample.transported) @ g4 @ sample.frame.Lbar
    psi_rebuilt = sample.psi_transport + shift * float(L @ g4 @ T)
    return float(np.max(np.abs(psi_parallel - sample.psi_transport))), psi_parallel, psi_rebuilt


def transport_residuals(sample: LeafSample) -> tuple[float, float, np.ndarray]:
    """Residuals of phi and psi between definition and transport at one leaf sample."""
    residual, _, psi_rebuilt = _transport_pair(sample)
    residual_psi = max(residual, float(np.max(np.abs(psi_rebuilt - sample.psi))))
    return abs(sample.phi - sample.phi_transport), residual_psi, psi_rebuilt


def foliation_scalars(metric: MetricField, ray: NullGeodesic, s_values) -> TransportState:
    s_values = np.asarray(s_values, dtype=float)
    phi, psi, phi_tr, psi_tr, res_phi, res_psi = [], [], [], [], [], []
    for s in s_values:
        if s == 0.0:
            phi.append(1.0)
            psi.append(np.zeros(2))
            phi_tr.append(1.0)
            psi_tr.append(np.zeros(2))
            res_phi.append(0.0)
            res_psi.append(0.0)
            continue
        sample = leaf_sample(metric, ray, s)
        residual_phi, residual_psi, psi_rebuilt = transport_residuals(sample)
        phi.append(sample.phi)
        psi.append(sample.psi)
        phi_tr.append(sample.phi_transport)
        psi_tr.append(psi_rebuilt)
        res_phi.append(residual_phi)
        res_psi.append(residual_psi)
    return TransportState(
        along=ray,
        s=s_values,
        phi=np.array(phi),
        psi=np.array(psi),
        phi_transport=np.array(phi_tr),
        psi_transport=np.array(psi_tr),
        residual_phi=np.array(res_phi),
        residual_psi=np.array(res_psi),
    )


def smallness_monitor(states: list[TransportState] | TransportState) -> SmallnessReport:
    """Running max of |phi - 1| + |psi| against the bootstrap and improved bounds."""
    if isinstance(states, TransportState):
        states = [states]
    deviation = max((float(np.max(state.deviation)) for state in states if len(state.s)), default=0.0)
    return SmallnessReport(
        max_deviation=deviation,
        bootstrap_ok=deviation <= BOOTSTRAP_BOUND,
        improved_ok=deviation <= IMPROVED_BOUND,
    )


def t_foliation_consistency(metric: MetricField, ray: NullGeodesic, s: float) -> dict[str, float]:
    """
    Residuals of the frame relations between the geodesic and t-foliations at one point.

    The primed frame e'_a = e_a - phi psi_a L, Lbar' = Lbar - 2 phi psi_a e_a + phi^2 |psi|^2 L and
    N = -1/2 (phi L - phi^-1 Lbar') are built explicitly; chi' and zeta' are contracted from them.
    """
    sample = leaf_sample(metric, ray, s)
    g4 = sample.g4
    L, Lbar, leaf = sample.frame.L, sample.frame.Lbar, sample.frame.leaf
    phi, psi = sample.phi, sample.psi
    T = sample.T

    leaf_primed = leaf - phi * np.outer(psi, L)
    lbar_primed = Lbar - 2.0 * phi * psi @ leaf + phi**2 * (psi @ psi) * L
    normal = -0.5 * (phi * L - lbar_primed / phi)

    # D_{e_a} L from the Jacobi fields; D_L L = 0 so it also equals D_{e'_a} L
    y = sample.state
    A_inv = np.linalg.inv(sample.transverse)
    jacobi = np.stack([y[J1], y[J2]])
    covariant = np.stack([y[DJ1], y[DJ2]]) + np.einsum("abc,b,kc->ka", sample.gamma, L, jacobi)
    derivative = A_inv @ covariant

    chi_primed = derivative @ g4 @ leaf_primed.T
    zeta_primed = 0.5 * derivative @ g4 @ lbar_primed
    expected_zeta = sample.zeta - phi * sample.chi @ psi
    return {
        "chi": float(np.max(np.abs(chi_primed - sample.chi))),
        "zeta": float(np.max(np.abs(zeta_primed - expected_zeta))),
        "normal_norm": abs(float(normal @ g4 @ normal) - 1.0),
        "normal_T": abs(float(normal @ g4 @ T)),
        "normal_identity": float(np.max(np.abs(normal + T + phi * L))),
    }


@dataclass
class OrderStudy:
    """Max residuals of fixed-step integrations of one ray, one entry per step size."""

    steps: list[float]
    transport: list[float]
    null: list[float]

    @staticmethod
    def ratios(residuals: list[float]) -> list[float]:
        return [coarse / fine if fine > 0.0 else np.inf for coarse, fine in zip(residuals[:-1], residuals[1:])]


def transport_order(
    metric: MetricField,
    p: SpacetimePoint,
    omega,
    s_end: float,
    steps: list[float],
    method: str = "RK45",
    samples: int = 8,
) -> OrderStudy:
    """
    Integrate the extended ray with each fixed step and record the transport and null residuals.

    The transport residual is max(|phi - phi_tr|, |psi - psi_tr|) over samples nodes in (0, s_end].
    """
    s_values = np.linspace(s_end / samples, s_end, samples)
    study = OrderStudy(steps=[float(step) for step in steps], transport=[], null=[])
    for step in steps:
        tolerances = TolerancesSchema(method=method, fixed_step=step, null_tol=1.0)
        ray = integrate_geodesic(metric, p, omega, s_end, tolerances, extended=True)
        reachable = s_values[s_values <= ray.s_end + 1e-12]
        state = foliation_scalars(metric, ray, reachable)
        study.transport.append(float(max(np.max(state.residual_phi), np.max(state.residual_psi), 0.0)))
        study.null.append(float(ray.null_residual_max))
    logger.debug("Step study for %s: transport %s, null %s.", metric.family, study.transport, study.null)
    return study
