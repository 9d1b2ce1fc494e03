import math


def validate_interval(interval: tuple[float, float]) -> None:
    t_min, t_max = interval
    if not (math.isfinite(t_min) and math.isfinite(t_max)):
        raise ValueError("Interval endpoints must be finite.")
    if t_min >= t_max:
        raise ValueError(f"Interval must satisfy t_min < t_max, got [{t_min}, {t_max}].")


def validate_spatial_vector(x: list[float]) -> None:
    if len(x) != 3:
        raise ValueError(f"Spatial coordinates must have 3 components, got {len(x)}.")
    if not all(math.isfinite(value) for value in x):
        raise ValueError("Spatial coordinates must be finite.")


def validate_cutoff_box(box: list[list[float]]) -> None:
    if len(box) != 3:
        raise ValueError("Cutoff box needs one [lower, upper] pair per spatial axis.")
    for axis, bounds in enumerate(box):
        if len(bounds) != 2 or not bounds[0] < bounds[1]:
            raise ValueError(f"Cutoff box axis {axis} must be [lower, upper] with lower < upper.")


def validate_increasing(values: list[float], name: str) -> None:
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly increasing.")


def validate_decreasing(values: list[float], name: str) -> None:
    if any(b >= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly decreasing.")
