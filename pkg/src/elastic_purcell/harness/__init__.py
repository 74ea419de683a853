"""Configuration, scenario library and command-line entry point."""

from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .scenarios import SCENARIOS, RunReport, run_scenario

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "parse_config",
           "SCENARIOS", "RunReport", "run_scenario"]
