from cutlocus.spatial_hash import SpatialHash
from cutlocus.intersections import LevelSnapshot, level_snapshot, detect_intersections, crossing_angle
from cutlocus.report import injectivity_report, slab_scan, sample_slab_points, default_t_levels, radius_error_bar
from cutlocus.checks import opposite_angle_check, ball_inclusion_check, audited_epsilon
