from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import ConvexHull

from exceptions import LevelOutOfRangeError


MAX_GRID_LEVEL = 6


@dataclass(frozen=True)
class SphereGrid:
    """Geodesic icosphere: unit directions with spherical-area weights summing to 4 pi."""

    level: int
    vertices: np.ndarray
    faces: np.ndarray
    areas: np.ndarray
    neighbors: tuple[np.ndarray, ...]
    spacing: float
    tangents: np.ndarray

    def __len__(self) -> int:
        return len(self.vertices)

    def angle(self, i: int, j: int) -> float:
        return float(np.arccos(np.clip(self.vertices[i] @ self.vertices[j], -1.0, 1.0)))


def base_icosahedron() -> np.ndarray:
    """Poles on z plus two staggered rings of five."""
    ring = 5
    c = 1.0 / np.sqrt(1.25)
    angles = (2.0 * np.pi / ring) * np.arange(ring)[:, None]
    upper = c * np.hstack((np.cos(angles), np.sin(angles), 0.5 * np.ones((ring, 1))))
    lower = c * np.hstack((np.cos(angles + 0.2 * np.pi), np.sin(angles + 0.2 * np.pi), -0.5 * np.ones((ring, 1))))
    return np.vstack(([[0.0, 0.0, 1.0]], upper, lower, [[0.0, 0.0, -1.0]]))


def _outward(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    a, b, c = vertices[faces[:, 0]], vertices[faces[:, 1]], vertices[faces[:, 2]]
    flip = np.einsum("ij,ij->i", np.cross(b - a, c - a), a) < 0.0
    faces = faces.copy()
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return faces


def _subdivide(vertices: list[np.ndarray], faces: np.ndarray) -> np.ndarray:
    cache: dict[tuple[int, int], int] = {}

    def midpoint(i: int, j: int) -> int:
        key = (min(i, j), max(i, j))
        if key not in cache:
            point = vertices[i] + vertices[j]
            vertices.append(point / np.linalg.norm(point))
            cache[key] = len(vertices) - 1
        return cache[key]

    refined = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        refined.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
    return np.array(refined, dtype=int)


def spherical_triangle_area(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    triple = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    denominator = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2.0 * np.arctan2(triple, denominator)


def tangent_basis(omega: np.ndarray) -> np.ndarray:
    """Orthonormal (u1, u2) with (u1, u2, omega) right-handed."""
    omega = np.asarray(omega, dtype=float)
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(omega)))] = 1.0
    u1 = axis - (axis @ omega) * omega
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(omega, u1)
    return np.stack([u1, u2])


@lru_cache(maxsize=None)
def icosphere(level: int) -> SphereGrid:
    """
    Icosphere of the given subdivision level with 10 * 4^level + 2 directions.

    Coordinates are permuted so the base poles sit on the first axis; vertex areas are a
    third of the adjacent spherical triangles.
    """
    if not 0 <= level <= MAX_GRID_LEVEL:
        raise LevelOutOfRangeError(f"Grid level {level} is outside 0..{MAX_GRID_LEVEL}.")
    base = base_icosahedron()
    faces = _outward(base, ConvexHull(base).simplices)
    vertices = list(base)
    for _ in range(level):
        faces = _subdivide(vertices, faces)
    points = np.array(vertices)[:, [2, 0, 1]]
    faces = _outward(points, faces)

    face_areas = spherical_triangle_area(points[faces[:, 0]], points[faces[:, 1]], points[faces[:, 2]])
    areas = np.zeros(len(points))
    for corner in range(3):
        np.add.at(areas, faces[:, corner], face_areas / 3.0)

    adjacency: list[set[int]] = [set() for _ in points]
    for a, b, c in faces:
        adjacency[a].update((b, c))
        adjacency[b].update((a, c))
        adjacency[c].update((a, b))
    neighbors = tuple(np.array(sorted(group), dtype=int) for group in adjacency)

    edges = np.array(sorted({(min(i, j), max(i, j)) for i, group in enumerate(adjacency) for j in group}))
    spacing = float(np.mean(np.arccos(np.clip(np.einsum("ij,ij->i", points[edges[:, 0]], points[edges[:, 1]]), -1.0, 1.0))))

    tangents = np.stack([tangent_basis(omega) for omega in points])
    for array in (points, faces, areas, tangents):
        array.setflags(write=False)
    return SphereGrid(
        level=level,
        vertices=points,
        faces=faces,
        areas=areas,
        neighbors=neighbors,
        spacing=spacing,
        tangents=tangents,
    )
