"""Scenario configuration, experiment drivers and the command-line front end."""

from .config import DEFAULTS, ConfigError, ScenarioConfig, load_config, parse_config
from .experiments import EXPERIMENTS, benchmark_uniform, scenario_geometry

__all__ = ["DEFAULTS", "ConfigError", "ScenarioConfig", "load_config", "parse_config",
           "EXPERIMENTS", "benchmark_uniform", "scenario_geometry"]
