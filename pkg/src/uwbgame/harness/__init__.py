"""Batch experiment runner: scenario files in, CSV and JSON results out."""
from .config import Scenario, load_scenario, parse_scenario
from .experiments import ExperimentResult, run_experiment

__all__ = ["Scenario", "load_scenario", "parse_scenario", "ExperimentResult", "run_experiment"]
