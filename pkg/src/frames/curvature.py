import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from exceptions import NonTimelikeTError
from frames.null_frame import NullFrame
from metric import adapted_frame, frame_components


logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def permutation_symbol(dimension: int = 4) -> np.ndarray:
    symbol = np.zeros((dimension,) * dimension)
    for perm in itertools.permutations(range(dimension)):
        inversions = sum(1 for i in range(dimension) for j in range(i + 1, dimension) if perm[i] > perm[j])
        symbol[perm] = -1.0 if inversions % 2 else 1.0
    return symbol


def levi_civita(g4: np.ndarray) -> np.ndarray:
    """eps_abcd with eps_0123 = +sqrt|det g|."""
    volume = np.sqrt(np.abs(np.linalg.det(g4)))
    return volume[..., None, None, None, None] * permutation_symbol(4)


def ricci_tensor(riemann: np.ndarray, g4_inv: np.ndarray) -> np.ndarray:
    return np.einsum("...ac,...abcd->...bd", g4_inv, riemann)


def weyl_tensor(riemann: np.ndarray, g4: np.ndarray, g4_inv: np.ndarray) -> np.ndarray:
    """Trace-free part of the curvature tensor; equal to it for vacuum metrics."""
    ricci = ricci_tensor(riemann, g4_inv)
    scalar = np.einsum("...bd,...bd->...", g4_inv, ricci)

    def kulkarni(h: np.ndarray, k: np.ndarray) -> np.ndarray:
        return (
            np.einsum("...ac,...bd->...abcd", h, k)
            + np.einsum("...bd,...ac->...abcd", h, k)
            - np.einsum("...ad,...bc->...abcd", h, k)
            - np.einsum("...bc,...ad->...abcd", h, k)
        )

    return (
        riemann
        - 0.5 * kulkarni(g4, ricci)
        + (scalar / 12.0)[..., None, None, None, None] * kulkarni(g4, g4)
    )


def hodge_dual(tensor: np.ndarray, g4: np.ndarray, g4_inv: np.ndarray) -> np.ndarray:
    """Left dual *W_abcd = 1/2 eps_ab^mn W_mncd."""
    eps = levi_civita(g4)
    raised = np.einsum("...mp,...nq,...pqcd->...mncd", g4_inv, g4_inv, tensor)
    return 0.5 * np.einsum("...abmn,...mncd->...abcd", eps, raised)


@dataclass
class NullCurvatureComponents:
    alpha: np.ndarray
    beta: np.ndarray
    rho: float
    sigma: float
    betabar: np.ndarray
    alphabar: np.ndarray

    def squared_norms(self) -> dict[str, float]:
        return {
            "alpha": float(np.sum(self.alpha**2)),
            "beta": float(np.sum(self.beta**2)),
            "rho": float(self.rho**2),
            "sigma": float(self.sigma**2),
            "betabar": float(np.sum(self.betabar**2)),
        }


def null_decomposition(weyl: np.ndarray, frame: NullFrame, g4: np.ndarray, dual: np.ndarray | None = None) -> NullCurvatureComponents:
    """
    Components of a Weyl field in the null frame.

    alpha_ab = W(L, e_a, L, e_b), beta_a = 1/2 W(e_a, L, Lbar, L), rho = 1/4 W(Lbar, L, Lbar, L),
    sigma = 1/4 *W(Lbar, L, Lbar, L), betabar_a = 1/2 W(e_a, Lbar, Lbar, L), alphabar_ab = W(Lbar, e_a, Lbar, e_b).
    """
    if dual is None:
        dual = hodge_dual(weyl, g4, np.linalg.inv(g4))
    basis = frame.matrix()
    w = frame_components(weyl, basis)
    w_dual = frame_components(dual, basis)
    # frame index 0 = L, 1 = Lbar, 2..3 = e_a
    return NullCurvatureComponents(
        alpha=w[0, 2:, 0, 2:],
        beta=0.5 * w[2:, 0, 1, 0],
        rho=0.25 * float(w[1, 0, 1, 0]),
        sigma=0.25 * float(w_dual[1, 0, 1, 0]),
        betabar=0.5 * w[2:, 1, 1, 0],
        alphabar=w[1, 2:, 1, 2:],
    )


@dataclass
class ElectricMagnetic:
    E: np.ndarray
    H: np.ndarray

    @property
    def energy(self) -> np.ndarray:
        return np.sum(self.E**2, axis=(-2, -1)) + np.sum(self.H**2, axis=(-2, -1))


def electric_magnetic(weyl: np.ndarray, g4: np.ndarray, g4_inv: np.ndarray, n: np.ndarray, g: np.ndarray) -> ElectricMagnetic:
    """E_ij = W(e_i, T, e_j, T) and H_ij = *W(e_i, T, e_j, T) in the T-adapted orthonormal frame (batched)."""
    frame = adapted_frame(n, g)
    w = frame_components(weyl, frame)
    w_dual = frame_components(hodge_dual(weyl, g4, g4_inv), frame)
    return ElectricMagnetic(E=w[..., 1:, 0, 1:, 0], H=w_dual[..., 1:, 0, 1:, 0])


def curvature_from_electric_magnetic(E: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Orthonormal-frame Weyl components rebuilt from a traceless symmetric pair (E, H)."""
    eps3 = permutation_symbol(3)
    weyl = np.zeros((4, 4, 4, 4))
    spatial = slice(1, 4)

    weyl[spatial, 0, spatial, 0] = E
    weyl[0, spatial, 0, spatial] = E
    weyl[spatial, 0, 0, spatial] = -E
    weyl[0, spatial, spatial, 0] = -E

    magnetic = np.einsum("ijs,sk->ijk", eps3, H)
    weyl[spatial, spatial, spatial, 0] = -magnetic
    weyl[spatial, spatial, 0, spatial] = magnetic
    weyl[spatial, 0, spatial, spatial] = -np.einsum("ijk->kij", magnetic)
    weyl[0, spatial, spatial, spatial] = np.einsum("ijk->kij", magnetic)

    weyl[spatial, spatial, spatial, spatial] = -np.einsum("ijs,klt,st->ijkl", eps3, eps3, E)
    return weyl


def bel_robinson_contract(weyl, dual, g4_inv, X, Y, Z, W) -> float:
    """Q(X, Y, Z, W) = W(X, ., Z, .) W(Y, ., W, .) + *W(X, ., Z, .) *W(Y, ., W, .)."""
    total = 0.0
    for tensor in (weyl, dual):
        left = np.einsum("alcm,a,c->lm", tensor, X, Z)
        right = np.einsum("bpdq,b,d->pq", tensor, Y, W)
        total += float(np.einsum("lm,pq,lp,mq->", left, right, g4_inv, g4_inv))
    return total


def bel_robinson_tensor(weyl: np.ndarray, g4: np.ndarray, g4_inv: np.ndarray) -> np.ndarray:
    dual = hodge_dual(weyl, g4, g4_inv)
    tensor = np.zeros(weyl.shape)
    for w in (weyl, dual):
        tensor = tensor + np.einsum("...alcm,...bpdq,...lp,...mq->...abcd", w, w, g4_inv, g4_inv, optimize=True)
    return tensor


def bel_robinson_audit(weyl: np.ndarray, g4: np.ndarray, g4_inv: np.ndarray, n: float, g: np.ndarray) -> dict[str, float]:
    """Symmetry, trace and frame-component bounds of Q, relative to |E|^2 + |H|^2."""
    q = bel_robinson_tensor(weyl, g4, g4_inv)
    fields = electric_magnetic(weyl, g4, g4_inv, np.asarray(n), g)
    energy = float(fields.energy)
    scale = max(energy, 1e-300)
    frame_q = frame_components(q, adapted_frame(np.asarray(n), g))
    symmetry = max(
        float(np.max(np.abs(q - np.einsum("abcd->bacd", q)))),
        float(np.max(np.abs(q - np.einsum("abcd->cbad", q)))),
        float(np.max(np.abs(q - np.einsum("abcd->dbca", q)))),
    )
    trace = float(np.max(np.abs(np.einsum("ab,abcd->cd", g4_inv, q))))
    return {
        "energy": energy,
        "Q_TTTT": float(frame_q[0, 0, 0, 0]),
        "symmetry": symmetry / scale if energy > 0 else symmetry,
        "trace": trace / scale if energy > 0 else trace,
        "max_component": float(np.max(np.abs(frame_q))),
        "component_bound_ok": bool(np.max(np.abs(frame_q)) <= 4.0 * energy * (1.0 + 1e-9) + 1e-12),
    }


@dataclass
class BelRobinsonDensity:
    principal: float
    remainder: float
    total: float
    direct: float


def principal_density(components: NullCurvatureComponents) -> float:
    norms = components.squared_norms()
    return (
        0.25 * norms["alpha"]
        + 1.5 * norms["beta"]
        + 1.5 * (norms["rho"] + norms["sigma"])
        + 0.5 * norms["betabar"]
    )


def bel_robinson_density(
    components: NullCurvatureComponents,
    phi: float,
    psi: np.ndarray,
    frame: NullFrame,
    weyl: np.ndarray,
    dual: np.ndarray,
    g4: np.ndarray,
    tolerance: float = 1e-8,
) -> BelRobinsonDensity:
    """
    Split -Q(T, T, T, L) into the T0 = -(L + Lbar)/2 part and the remainder.

    T is rebuilt from (phi, psi) and the frame; a reconstruction that is not unit timelike
    raises NonTimelikeTError.
    """
    psi = np.asarray(psi, dtype=float)
    L, Lbar = frame.L, frame.Lbar
    T = -0.5 * phi * (1.0 + psi @ psi) * L - 0.5 / phi * Lbar + psi[0] * frame.e1 + psi[1] * frame.e2
    norm = float(T @ g4 @ T)
    if abs(norm + 1.0) > tolerance:
        raise NonTimelikeTError(f"Reconstructed T has g(T, T) = {norm:.6g}.")
    T0 = -0.5 * (L + Lbar)
    X = T - T0
    g4_inv = np.linalg.inv(g4)

    def q(a, b, c):
        return bel_robinson_contract(weyl, dual, g4_inv, a, b, c, L)

    principal = principal_density(components)
    remainder = -(3.0 * q(X, T0, T0) + 3.0 * q(X, X, T0) + q(X, X, X))
    direct = -q(T, T, T)
    return BelRobinsonDensity(principal=principal, remainder=remainder, total=principal + remainder, direct=direct)
