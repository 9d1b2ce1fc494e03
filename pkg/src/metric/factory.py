from typing import Callable

from exceptions import UnknownMetricFamilyError
from metric.derivatives import FiniteDifferenceDerivatives
from metric.families import (
    ConstantLapse,
    ExponentialMetric,
    FlatTorus,
    LapseBump,
    Minkowski,
    PerturbedTorus,
    SphericalCylinder,
)
from metric.interfaces import MetricField
from schemas import MetricSpecSchema


METRIC_FAMILIES: dict[str, Callable[..., MetricField]] = {
    "minkowski": Minkowski,
    "constant_lapse": ConstantLapse,
    "flat_torus": FlatTorus,
    "lapse_bump": LapseBump,
    "exponential": ExponentialMetric,
    "spherical_cylinder": SphericalCylinder,
    "perturbed_torus": PerturbedTorus,
}


def build_metric(spec: MetricSpecSchema) -> MetricField:
    try:
        family = METRIC_FAMILIES[spec.family]
    except KeyError:
        raise UnknownMetricFamilyError(
            f"Unknown metric family '{spec.family}'. Use one of: {', '.join(sorted(METRIC_FAMILIES))}."
        )

    derivatives = None
    if spec.derivatives.provider == "finite_difference":
        derivatives = FiniteDifferenceDerivatives(order=spec.derivatives.order, step_scale=spec.derivatives.step_scale)

    try:
        return family(spec.interval, derivatives=derivatives, **spec.params)
    except TypeError as e:
        raise UnknownMetricFamilyError(f"Invalid parameters for family '{spec.family}': {e}") from e
