"""Experiment runner and command line interface."""

from .config import ConfigError, ExperimentConfig, Scenario, load_config
from .design import DesignReport, validate_design
from .scenarios import run_scenario

__all__ = ["ConfigError", "DesignReport", "ExperimentConfig", "Scenario", "load_config",
           "run_scenario", "validate_design"]
