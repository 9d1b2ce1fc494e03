import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from exceptions import PointOutsideAtlasError


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: tuple[float, float, float]
    chart_id: str = "main"

    @classmethod
    def of(cls, t: float, x, chart_id: str = "main") -> "SpacetimePoint":
        return cls(float(t), tuple(float(value) for value in x), chart_id)

    def as_array(self) -> np.ndarray:
        return np.array([self.t, *self.x])


@dataclass(frozen=True)
class ChartDescriptor:
    chart_id: str = "main"
    lower: tuple[float, float, float] = (-math.inf, -math.inf, -math.inf)
    upper: tuple[float, float, float] = (math.inf, math.inf, math.inf)
    periods: tuple[float | None, float | None, float | None] = (None, None, None)
    scale: float = 1.0

    def is_periodic(self, axis: int) -> bool:
        return self.periods[axis] is not None

    @property
    def bounded(self) -> bool:
        return all(
            self.is_periodic(axis) or (math.isfinite(self.lower[axis]) and math.isfinite(self.upper[axis]))
            for axis in range(3)
        )

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        for axis in range(3):
            if self.is_periodic(axis):
                continue
            if not self.lower[axis] <= x[axis] <= self.upper[axis]:
                return False
        return True

    def wrap(self, x) -> tuple[np.ndarray, np.ndarray]:
        """
        Reduce periodic axes into the fundamental domain.

        :param x: Unwrapped chart coordinates, shape (..., 3).
        :return: Wrapped coordinates and the integer winding per axis.
        """
        x = np.array(x, dtype=float)
        winding = np.zeros(x.shape, dtype=int)
        for axis, period in enumerate(self.periods):
            if period is None:
                continue
            shifted = x[..., axis] - self.lower[axis]
            turns = np.floor(shifted / period)
            x[..., axis] = self.lower[axis] + shifted - turns * period
            winding[..., axis] = turns.astype(int)
        return x, winding

    def minimal_image(self, dx) -> np.ndarray:
        dx = np.array(dx, dtype=float)
        for axis, period in enumerate(self.periods):
            if period is not None:
                dx[..., axis] -= period * np.round(dx[..., axis] / period)
        return dx


@dataclass
class MetricJet:
    """Lapse and spatial metric with first and second derivatives in (t, x1, x2, x3)."""

    n: np.ndarray
    dn: np.ndarray
    ddn: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    provider: dict = field(default_factory=dict)


class DerivativeProvider(ABC):
    @abstractmethod
    def jet(self, metric: "MetricField", t, x, chart_id: str) -> MetricJet:
        """
        Evaluate the metric jet at one or many points.

        :param metric: The metric whose lapse and spatial metric are differentiated.
        :param t: Coordinate time, scalar or array broadcastable against x[..., 0].
        :param x: Spatial coordinates with shape (..., 3).
        :param chart_id: Chart in which x is expressed.
        :return: MetricJet with batch shape of the broadcast inputs.
        """
        pass

    @abstractmethod
    def record(self) -> dict:
        """
        Describe the provider for reports (kind, step, stencil order).

        :return: A JSON-serializable description.
        """
        pass


class MetricField(ABC):
    """
    Spacetime metric g = -n^2 dt^2 + g_ij dx^i dx^j in transported coordinates.

    Instances are immutable after construction and picklable, so the same field can be
    shared by every worker of a ray pool.
    """

    family: str = "abstract"
    vacuum: bool = False
    static: bool = False

    def __init__(
        self,
        atlas: tuple[ChartDescriptor, ...],
        interval: tuple[float, float],
        derivatives: DerivativeProvider | None = None,
        params: dict | None = None,
    ):
        self.atlas = tuple(atlas)
        self.interval = (float(interval[0]), float(interval[1]))
        self.derivatives = derivatives
        self.params = dict(params or {})
        self._charts = {chart.chart_id: chart for chart in self.atlas}

    @abstractmethod
    def lapse(self, t, x, chart_id: str = "main") -> np.ndarray:
        """
        Evaluate the lapse n(t, x) > 0.

        :param t: Coordinate time (scalar or array).
        :param x: Spatial coordinates with shape (..., 3).
        :param chart_id: Chart of x.
        :return: Array of lapse values with the batch shape.
        """
        pass

    @abstractmethod
    def spatial_metric(self, t, x, chart_id: str = "main") -> np.ndarray:
        """
        Evaluate the symmetric positive definite g_ij(t, x).

        :param t: Coordinate time (scalar or array).
        :param x: Spatial coordinates with shape (..., 3).
        :param chart_id: Chart of x.
        :return: Array with shape (..., 3, 3).
        """
        pass

    def analytic_jet(self, t, x, chart_id: str = "main") -> MetricJet:
        raise NotImplementedError(f"Metric family '{self.family}' has no analytic derivatives.")

    def jet(self, t, x, chart_id: str = "main") -> MetricJet:
        if self.derivatives is None:
            jet = self.analytic_jet(t, x, chart_id)
            jet.provider = {"provider": "analytic"}
            return jet
        return self.derivatives.jet(self, t, x, chart_id)

    def provider_record(self) -> dict:
        if self.derivatives is None:
            return {"provider": "analytic"}
        return self.derivatives.record()

    def chart(self, chart_id: str) -> ChartDescriptor:
        try:
            return self._charts[chart_id]
        except KeyError:
            raise PointOutsideAtlasError(f"Chart '{chart_id}' is not registered in the atlas.")

    def locate(self, point: SpacetimePoint) -> ChartDescriptor:
        chart = self.chart(point.chart_id)
        if not chart.contains(point.x):
            raise PointOutsideAtlasError(f"Point {point.x} lies outside chart '{point.chart_id}'.")
        return chart

    def chart_events(self, chart_id: str) -> list[Callable[[np.ndarray], float]]:
        """Scalar functions of x whose downward zero crossing hands a ray to another chart."""
        return []

    def transition(self, chart_id: str, x: np.ndarray) -> tuple[str, np.ndarray, np.ndarray]:
        """
        Move a point to the neighbouring chart.

        :return: New chart id, new coordinates, and the 3x3 Jacobian mapping spatial tangent components.
        """
        raise PointOutsideAtlasError(f"Chart '{chart_id}' has no neighbour.")

    def embed(self, x, chart_id: str = "main") -> np.ndarray:
        """Chart-independent coordinates used for spatial hashing (wrapped chart coordinates by default)."""
        wrapped, _ = self.chart(chart_id).wrap(x)
        return wrapped

    def embed_periods(self, chart_id: str = "main") -> tuple[float | None, ...]:
        return self.chart(chart_id).periods

    def separation(self, t: float, x1, chart1: str, x2, chart2: str) -> float:
        """
        Distance between two nearby points of the slice t.

        The default uses the minimal-image coordinate difference measured with g at the midpoint.
        """
        if chart1 != chart2:
            raise PointOutsideAtlasError("Default separation needs both points in one chart.")
        chart = self.chart(chart1)
        x1 = np.asarray(x1, dtype=float)
        dx = chart.minimal_image(np.asarray(x2, dtype=float) - x1)
        g = self.spatial_metric(t, x1 + 0.5 * dx, chart1)
        return float(np.sqrt(max(dx @ g @ dx, 0.0)))

    def describe(self) -> dict:
        return {"family": self.family, "params": self.params, "derivatives": self.provider_record()}
