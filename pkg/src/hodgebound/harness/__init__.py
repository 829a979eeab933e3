"""Configuration-driven experiments, reports and the command line."""

from .config import ConfigError, ExperimentConfig, load_config, loads
from .run import Check, SlopeError, SweepResult, run, slope_fit, verify_inequalities

__all__ = [
    "Check",
    "ConfigError",
    "ExperimentConfig",
    "SlopeError",
    "SweepResult",
    "load_config",
    "loads",
    "run",
    "slope_fit",
    "verify_inequalities",
]
