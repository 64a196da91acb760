"""Experiment harness: instance generation, ground truth, bound checks, outputs."""

from .bounds import accelerated_bound_check, theorem1_bound_check
from .config import SEC5_PRESET, ConfigError, RunConfig
from .instance import generate_instance
from .reference import centralized_reference
from .runner import run_experiment
