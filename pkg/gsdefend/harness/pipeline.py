"""End-to-end experiment: plan -> gen -> poison -> train x modes -> eval -> spectrum -> report."""

import logging
from collections.abc import Callable

from gsdefend.core.models import ExperimentSpec, ResultsTable, SpectralConfig, TrainMode
from gsdefend.harness.commands import evaluate, generate, plan, poison, report, spectrum, train_mode
from gsdefend.harness.layout import ExperimentLayout

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


def pipeline_steps(spec: ExperimentSpec) -> list[str]:
    """Step labels in execution order; the clean mode always trains first."""
    modes = sorted(spec.train, key=list(TrainMode).index)
    steps = ["gen", "poison"]
    for mode in modes:
        steps += [f"train {mode.value}", f"eval {mode.value}"]
    return steps + ["spectrum", "report"]


def run_experiment(spec: ExperimentSpec, on_step: Callable[[str], None] | None = None) -> ResultsTable:
    """
    Run the whole protocol into spec.output_dir.

    Args:
        spec: Seed, scene, attack and per-mode train configs
        on_step: Called with each step label after the step finishes

    Returns:
        The ResultsTable that was written to results.csv / results.md
    """
    layout = ExperimentLayout(spec.output_dir)
    done = on_step or (lambda label: None)
    logger.info(f"Experiment seed={spec.seed} modes={[m.value for m in spec.train]} -> {layout.root}")

    plan(layout, list(spec.train), spec.seed)
    generate(layout, spec.scene, spec.seed)
    done("gen")
    poison(layout, spec.attack)
    done("poison")

    modes = sorted(spec.train, key=list(TrainMode).index)
    for mode in modes:
        config = spec.train[mode]
        train_mode(layout, config, spec.seed)
        done(f"train {mode.value}")
        evaluate(layout, mode, config.spectral, config.fps_repeats, config.background)
        done(f"eval {mode.value}")

    spectral = spec.train[TrainMode.DEFENDED].spectral if TrainMode.DEFENDED in spec.train else SpectralConfig()
    spectrum(layout, spectral)
    for mode in modes:
        spectrum(layout, spectral, mode)
    done("spectrum")

    table = report(layout)
    done("report")
    return table
