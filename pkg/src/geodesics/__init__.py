from geodesics.grid import SphereGrid, icosphere, tangent_basis, spherical_triangle_area, MAX_GRID_LEVEL
from geodesics.integrator import (
    RaySystem,
    Segment,
    RayLevelPoint,
    NullGeodesic,
    integrate_geodesic,
    reparametrize,
    transition_state,
    terminal_event,
)
from geodesics.fan import RayFan, ConeSlice, trace_fan, exponential_map, round_ratio
from geodesics.conjugacy import JacobiState, jacobi_propagate, conjugacy_radius, transverse_matrix
