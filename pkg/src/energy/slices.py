import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass

import numpy as np

from config import get_worker_pool
from exceptions import UnboundedDomainError
from frames import electric_magnetic, weyl_tensor
from metric import MetricField, curvature_norm, deformation_from_sample, sample_batch


logger = logging.getLogger(__name__)

CHUNK_SIZE = 512


@dataclass
class SliceGrid:
    """
    Midpoint quadrature of one chart of the slice t = t_level.

    Periodic axes cover one period, bounded axes the chart, other axes the declared cutoff box.
    """

    t_level: float
    chart_id: str
    axes: tuple[np.ndarray, np.ndarray, np.ndarray]
    spacing: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    dv_weights: np.ndarray
    periodic: tuple[bool, bool, bool]

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(len(axis) for axis in self.axes)

    @property
    def volume(self) -> float:
        return float(self.dv_weights.sum())


def _axis_bounds(metric: MetricField, chart_id: str, axis: int, cutoff_box) -> tuple[float, float, bool]:
    chart = metric.chart(chart_id)
    if chart.is_periodic(axis):
        return chart.lower[axis], chart.lower[axis] + chart.periods[axis], True
    if cutoff_box is not None:
        lower, upper = cutoff_box[axis]
        return max(float(lower), chart.lower[axis]), min(float(upper), chart.upper[axis]), False
    if math.isfinite(chart.lower[axis]) and math.isfinite(chart.upper[axis]):
        return chart.lower[axis], chart.upper[axis], False
    raise UnboundedDomainError(
        f"Axis {axis} of chart '{chart_id}' of {metric.family} is unbounded; declare a cutoff box."
    )


def slice_grid(
    metric: MetricField,
    t_level: float,
    resolution: int,
    cutoff_box: list[list[float]] | None = None,
    chart_id: str = "main",
) -> SliceGrid:
    bounds = [_axis_bounds(metric, chart_id, axis, cutoff_box) for axis in range(3)]
    axes, spacing = [], []
    for lower, upper, _ in bounds:
        h = (upper - lower) / resolution
        axes.append(lower + h * (np.arange(resolution) + 0.5))
        spacing.append(h)
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = np.full(len(nodes), float(np.prod(spacing)))
    g = metric.spatial_metric(t_level, nodes, chart_id)
    return SliceGrid(
        t_level=float(t_level),
        chart_id=chart_id,
        axes=tuple(axes),
        spacing=np.array(spacing),
        nodes=nodes,
        weights=weights,
        dv_weights=weights * np.sqrt(np.linalg.det(g)),
        periodic=tuple(periodic for _, _, periodic in bounds),
    )


@dataclass
class SliceDensities:
    energy: np.ndarray
    curvature_squared: np.ndarray
    deformation: np.ndarray


def _density_task(task: tuple) -> SliceDensities:
    metric, t_level, nodes, chart_id = task
    s = sample_batch(metric, np.full(len(nodes), t_level), nodes, chart_id)
    weyl = weyl_tensor(s.riemann, s.g4, s.g4_inv)
    fields = electric_magnetic(weyl, s.g4, s.g4_inv, s.n, s.g)
    return SliceDensities(
        energy=fields.energy,
        curvature_squared=curvature_norm(s.riemann, s.n, s.g) ** 2,
        deformation=deformation_from_sample(s).pointwise_norm,
    )


def slice_densities(metric: MetricField, grid: SliceGrid, executor: Executor | None = None) -> SliceDensities:
    """|E|^2 + |H|^2, |R|^2 and |pi| at every node, evaluated in fixed-size chunks."""
    executor = executor or get_worker_pool()
    tasks = [
        (metric, grid.t_level, grid.nodes[start : start + CHUNK_SIZE], grid.chart_id)
        for start in range(0, len(grid.nodes), CHUNK_SIZE)
    ]
    chunks = list(executor.map(_density_task, tasks))
    return SliceDensities(
        energy=np.concatenate([chunk.energy for chunk in chunks]),
        curvature_squared=np.concatenate([chunk.curvature_squared for chunk in chunks]),
        deformation=np.concatenate([chunk.deformation for chunk in chunks]),
    )


def slice_energy(metric: MetricField, grid: SliceGrid, executor: Executor | None = None) -> float:
    """Q(t) = integral of |E|^2 + |H|^2 dv_g over the slice."""
    return float(grid.dv_weights @ slice_densities(metric, grid, executor).energy)


def l2_curvature(metric: MetricField, grid: SliceGrid, executor: Executor | None = None) -> float:
    return float(np.sqrt(grid.dv_weights @ slice_densities(metric, grid, executor).curvature_squared))
