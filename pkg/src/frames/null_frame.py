from dataclasses import dataclass

import numpy as np

from exceptions import DegenerateMetricError, FrameDegeneracyError
from metric import MetricField, SpacetimePoint, orthonormal_triad


@dataclass
class NullFrame:
    L: np.ndarray
    Lbar: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    base: SpacetimePoint

    @property
    def leaf(self) -> np.ndarray:
        return np.stack([self.e1, self.e2])

    def matrix(self) -> np.ndarray:
        """Columns L, Lbar, e1, e2 as coordinate vectors."""
        return np.stack([self.L, self.Lbar, self.e1, self.e2], axis=-1)


def spacetime_metric_at(metric: MetricField, p: SpacetimePoint) -> tuple[float, np.ndarray, np.ndarray]:
    x = np.asarray(p.x, dtype=float)
    n = float(metric.lapse(p.t, x, p.chart_id))
    g = metric.spatial_metric(p.t, x, p.chart_id)
    g4 = np.zeros((4, 4))
    g4[0, 0] = -n * n
    g4[1:, 1:] = g
    return n, g, g4


def unit_normal(n: float) -> np.ndarray:
    return np.array([1.0 / n, 0.0, 0.0, 0.0])


def initial_null_vector(metric: MetricField, p: SpacetimePoint, omega) -> np.ndarray:
    """
    Past-directed null vector normalized by g(l, T) = 1.

    The spatial part is omega pushed through the g-orthonormal triad at p, so |l_vec|_g = 1
    and l^0 = -1/n.
    """
    omega = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(omega) - 1.0) > 1e-10:
        raise ValueError("Direction omega must be a unit vector.")
    n, g, _ = spacetime_metric_at(metric, p)
    try:
        triad = orthonormal_triad(g)
    except np.linalg.LinAlgError as e:
        raise DegenerateMetricError(f"Spatial metric at {p} is not positive definite.") from e
    if n <= 0.0:
        raise DegenerateMetricError(f"Lapse at {p} is not positive.")
    return np.concatenate([[-1.0 / n], triad @ omega])


def conjugate_null_vector(g4: np.ndarray, T: np.ndarray, L: np.ndarray, leaf: np.ndarray) -> np.ndarray:
    """
    The null vector orthogonal to the leaf with g(L, Lbar) = -2.

    W = T - psi_a e_a spans the leaf normal plane together with L.
    """
    psi = leaf @ g4 @ T
    W = T - psi @ leaf
    w_l = W @ g4 @ L
    if abs(w_l) < 1e-14:
        raise FrameDegeneracyError("L is orthogonal to the leaf normal; cannot complete the frame.")
    a = -2.0 / w_l
    b = -a * (W @ g4 @ W) / (2.0 * w_l)
    return a * W + b * L


def gram_schmidt(vectors: list[np.ndarray], g4: np.ndarray) -> list[np.ndarray]:
    basis = []
    for vector in vectors:
        for existing in basis:
            vector = vector - (vector @ g4 @ existing) * existing
        norm = np.sqrt(vector @ g4 @ vector)
        basis.append(vector / norm)
    return basis


def null_frame(metric: MetricField, p: SpacetimePoint, L, leaf: np.ndarray | None = None) -> NullFrame:
    """
    Complete a past null vector L to a frame (L, Lbar, e1, e2).

    With a leaf (two tangent vectors of the cone section through p) Lbar is the leaf normal
    of the geodesic foliation. Without one the leaf is taken orthogonal to T and the spatial
    direction of L, with e_a from Gram-Schmidt of the coordinate triad.
    """
    L = np.asarray(L, dtype=float)
    n, g, g4 = spacetime_metric_at(metric, p)
    T = unit_normal(n)
    l_t = L @ g4 @ T
    if abs(l_t) < 1e-14:
        raise FrameDegeneracyError("g(L, T) vanishes; L is not a null direction transverse to the slice.")

    if leaf is None:
        phi = 1.0 / l_t
        direction = phi * L + T
        triad = orthonormal_triad(g)
        candidates = []
        for i in range(3):
            e = np.concatenate([[0.0], triad[:, i]])
            projected = e - (e @ g4 @ direction) * direction
            candidates.append((np.sqrt(max(projected @ g4 @ projected, 0.0)), i, projected))
        dropped = min(candidates, key=lambda item: item[0])[1]
        kept = [vector for _, i, vector in candidates if i != dropped]
        leaf_vectors = gram_schmidt(kept, g4)
    else:
        leaf_vectors = gram_schmidt([np.asarray(vector, dtype=float) for vector in leaf], g4)

    leaf_array = np.stack(leaf_vectors)
    Lbar = conjugate_null_vector(g4, T, L, leaf_array)
    return NullFrame(L=L, Lbar=Lbar, e1=leaf_vectors[0], e2=leaf_vectors[1], base=p)


def volume_form(g4: np.ndarray, vectors: np.ndarray) -> float:
    """eps(v1, v2, v3, v4) with eps_0123 = +sqrt|det g| (right-handed in (t, x1, x2, x3))."""
    return float(np.sqrt(abs(np.linalg.det(g4))) * np.linalg.det(np.asarray(vectors)))


def frame_audit(frame: NullFrame, g4: np.ndarray) -> dict[str, float]:
    """Residuals of the eight orthonormality relations and the frame volume."""
    def dot(a, b):
        return float(a @ g4 @ b)

    residuals = {
        "LL": abs(dot(frame.L, frame.L)),
        "LbarLbar": abs(dot(frame.Lbar, frame.Lbar)),
        "LLbar": abs(dot(frame.L, frame.Lbar) + 2.0),
        "Le1": abs(dot(frame.L, frame.e1)),
        "Le2": abs(dot(frame.L, frame.e2)),
        "Lbare1": abs(dot(frame.Lbar, frame.e1)),
        "Lbare2": abs(dot(frame.Lbar, frame.e2)),
        "e1e1": abs(dot(frame.e1, frame.e1) - 1.0),
        "e2e2": abs(dot(frame.e2, frame.e2) - 1.0),
        "e1e2": abs(dot(frame.e1, frame.e2)),
    }
    volume = volume_form(g4, [frame.L, frame.Lbar, frame.e1, frame.e2])
    return residuals | {"max": max(residuals.values()), "volume": volume}
