import itertools
import math
from collections import defaultdict

import numpy as np


class SpatialHash:
    """
    Uniform-cell hash over k-dimensional points, periodic along axes with a period.

    A query returns every key stored in a cell overlapping the box of half-width radius
    around the point; callers filter by true distance.
    """

    def __init__(self, cell_size: float, periods: tuple[float | None, ...]):
        if cell_size <= 0.0:
            raise ValueError("cell_size must be positive.")
        self.periods = tuple(periods)
        self.cell_sizes = []
        self.cell_counts = []
        for period in self.periods:
            if period is None:
                self.cell_sizes.append(cell_size)
                self.cell_counts.append(None)
            else:
                count = max(1, int(period // cell_size))
                self.cell_sizes.append(period / count)
                self.cell_counts.append(count)
        self.hash_table: dict[tuple[int, ...], set] = defaultdict(set)

    def _get_cell_coords(self, point) -> tuple[int, ...]:
        coords = []
        for value, size, count in zip(point, self.cell_sizes, self.cell_counts):
            index = int(math.floor(value / size))
            coords.append(index % count if count is not None else index)
        return tuple(coords)

    def _get_intersecting_cells(self, point, radius: float) -> set[tuple[int, ...]]:
        center = self._get_cell_coords(point)
        ranges = []
        for index, size, count in zip(center, self.cell_sizes, self.cell_counts):
            reach = int(math.ceil(radius / size))
            if count is None:
                ranges.append(range(index - reach, index + reach + 1))
            else:
                ranges.append({(index + k) % count for k in range(-reach, reach + 1)})
        return set(itertools.product(*ranges))

    def insert(self, key, point) -> None:
        self.hash_table[self._get_cell_coords(np.asarray(point, dtype=float))].add(key)

    def query_candidates(self, point, radius: float) -> set:
        candidates = set()
        for cell in self._get_intersecting_cells(np.asarray(point, dtype=float), radius):
            if cell in self.hash_table:
                candidates.update(self.hash_table[cell])
        return candidates

    def candidate_pairs(self, points: dict, radius: float) -> set[tuple]:
        """Unordered key pairs whose cells lie within radius of each other."""
        for key, point in points.items():
            self.insert(key, point)
        pairs = set()
        for key, point in points.items():
            for other in self.query_candidates(point, radius):
                if other != key:
                    pairs.add((min(key, other), max(key, other)))
        return pairs

    def clear(self) -> None:
        self.hash_table.clear()
