from energy.slices import SliceGrid, SliceDensities, slice_grid, slice_densities, slice_energy, l2_curvature
from energy.gronwall import gronwall_check, metric_equivalence
from energy.volume import (
    SliceGeodesicSystem,
    SliceRay,
    shoot,
    straight_lift_length,
    cut_radius,
    radius_ladder,
    graph_distances,
    counted_volume,
    volume_radius,
)
