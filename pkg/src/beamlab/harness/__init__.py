"""Configuration, experiment registry, persistence and CLI."""
from .config import RunConfig, load, loads
from .experiments import REGISTRY, default_config, list_experiments
from .runner import ExperimentReport, run

__all__ = ["REGISTRY", "ExperimentReport", "RunConfig", "default_config", "list_experiments",
           "load", "loads", "run"]
