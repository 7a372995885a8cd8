"""Level-set curve shortening flow on conformal surfaces and the avoidance principle."""

from .avoidance import (
    AvoidanceReport, approach_rate_check, avoidance_report, escape_bound_check, finite_speed_check,
)
from .config import ScenarioConfig, build_region, load_config, serialize
from .distance import (
    RegionSet, eikonal_distance, foot_direction_alignment, offset_region, point_region, set_distance,
    signed_distance,
)
from .flow import FlowParams, Trajectory, evolve, mcf_step, offset_flow, reinitialize
from .grid import Grid, MetricSpec, make_metric, metric_edge_length, ricci_lower_bound
from .interpolation import (
    extract_midsurface, harmonic_interpolant, select_regular_value, uniform_c1_check,
)
from .oracles import oracle
from .runner import run_scenario
from .svg import render_svg

__version__ = "0.1.0"
