"""beaconsim: a deterministic discrete-event simulator for beacon-update
strategies in geographic routing, with an analytical overhead model."""

from .config import ConfigError, ScenarioConfig, load_scenario
from .harness import SweepSpec, compare, run_sweep
from .metrics import MetricsReport, emit_report
from .simulation import Simulation, run_scenario

__all__ = [
    "ConfigError", "ScenarioConfig", "load_scenario",
    "SweepSpec", "compare", "run_sweep",
    "MetricsReport", "emit_report",
    "Simulation", "run_scenario",
]
