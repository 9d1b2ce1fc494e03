import numpy as np

from exceptions import RankUnsupportedError


def orthonormal_triad(g: np.ndarray) -> np.ndarray:
    """
    Gram-Schmidt of the coordinate basis (in coordinate order) against g.

    Columns of the result are the frame vectors E_1, E_2, E_3; the matrix is upper triangular
    with positive diagonal, so the orientation of (x1, x2, x3) is kept.
    """
    lower = np.linalg.cholesky(g)
    return np.linalg.inv(np.swapaxes(lower, -1, -2))


def adapted_frame(n: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Columns T = n^-1 d_t, E_1, E_2, E_3 as spacetime coordinate vectors."""
    shape = np.shape(n)
    frame = np.zeros(shape + (4, 4))
    frame[..., 0, 0] = 1.0 / np.asarray(n)
    frame[..., 1:, 1:] = orthonormal_triad(g)
    return frame


def frame_components(tensor: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """Contract every index of a covariant tensor with the frame vectors (columns of frame)."""
    rank = tensor.ndim - (frame.ndim - 2)
    if rank > 4:
        raise RankUnsupportedError(f"Tensor rank {rank} is above 4.")
    coordinate, framed = "abcd"[:rank], "ijkl"[:rank]
    operands = ",".join(f"...{c}{f}" for c, f in zip(coordinate, framed))
    return np.einsum(f"...{coordinate},{operands}->...{framed}", tensor, *([frame] * rank), optimize=True)


def riemannian_norm(components: np.ndarray) -> float:
    """
    Norm of a tensor given by its components in a T-adapted orthonormal frame.

    The auxiliary Riemannian metric is the identity in such a frame, so the norm is the
    square root of the sum of squared components.
    """
    components = np.asarray(components, dtype=float)
    if components.ndim > 4:
        raise RankUnsupportedError(f"Tensor rank {components.ndim} is above 4.")
    return float(np.sqrt(np.sum(components**2)))


def spatial_norm(tensor: np.ndarray, g: np.ndarray) -> np.ndarray:
    """g-norm of a symmetric covariant 2-tensor on the slice, batched."""
    g_inv = np.linalg.inv(g)
    mixed = np.einsum("...ij,...jk->...ik", g_inv, tensor)
    return np.sqrt(np.einsum("...ij,...ji->...", mixed, mixed))
