"""Single-cell LTE downlink simulator comparing energy-aware sleep scheduling with DRX."""

from .config import Algorithm, AntennaMode, ScenarioConfig, load_scenario, load_scenario_file
from .engine import MetricsReport, run
from .report import SweepVariable, emit_csv, sweep

__all__ = [
    "Algorithm", "AntennaMode", "MetricsReport", "ScenarioConfig", "SweepVariable",
    "emit_csv", "load_scenario", "load_scenario_file", "run", "sweep",
]
__version__ = "0.1.0"
