from validation.scenario import (
    validate_interval,
    validate_spatial_vector,
    validate_cutoff_box,
    validate_increasing,
    validate_decreasing,
)
