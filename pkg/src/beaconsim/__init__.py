"""Discrete-event simulator for a beacon-enabled IEEE 802.15.4 star network."""

from .engine import Simulator
from .metrics import Counters, DropCause, MetricsReport, scan_trace
from .scenario import ConfigError, RunPoint, ScenarioConfig, load_config, run_matrix, run_point

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "Counters", "DropCause", "MetricsReport", "RunPoint", "ScenarioConfig",
    "Simulator", "load_config", "run_matrix", "run_point", "scan_trace",
]
