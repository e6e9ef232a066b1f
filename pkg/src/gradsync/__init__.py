"""Gradient clock synchronization over a weighted estimate layer."""

from .clocks import DriftKind, DriftSchedule, HardwareClock, hardware_interval, make_drift_schedule
from .config import ConfigError, parse_scenario_config
from .gcs import LogicalClockState, Mode, evaluate_fast_condition, kappa_for_edge
from .metrics import GradientBoundSpec, SkewReport, check_gradient_bound, compute_skew_report
from .simengine import DelayKind, DelayPolicy, Scenario, Trace, assign_delay, run_scenario
from .topology import (
    EdgeKind,
    EstimateGraph,
    NetworkGraph,
    SystemParams,
    TopologyKind,
    TopologySpec,
    build_estimate_graph,
    build_network,
    effective_diameter,
    effective_distance,
    direct_uncertainty,
    rbs_uncertainty,
)

__version__ = "0.1.0"
