"""Experiment harness: CLI commands, directory layout, results tables and the full pipeline."""

from gsdefend.harness.layout import ExperimentLayout
from gsdefend.harness.pipeline import run_experiment

__all__ = ["ExperimentLayout", "run_experiment"]
