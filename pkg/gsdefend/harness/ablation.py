"""Sweeps over the defense and the attack budget.

Each point trains on the same bundle with the same seed, so points differ only in the swept value.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

from gsdefend.attack.poison import poison_images, poison_report
from gsdefend.core.errors import ConfigurationError
from gsdefend.core.models import AttackConfig, PoisonReport, TrainConfig, TrainMode, TrainSummary
from gsdefend.scene.types import DatasetBundle
from gsdefend.training.trainer import train

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

# Dotted TrainConfig keys, as written in config files
ABLATION_KEYS = (
    "freq_filter.t_ref",
    "freq_filter.alpha",
    "prune_ratio",
    "prune_interval",
    "spectral.gamma_min",
    "spectral.gamma_max",
    "spectral.bins",
    "lambda_freq",
)


@dataclass(frozen=True)
class AblationPoint:
    key: str
    value: float
    summary: TrainSummary


@dataclass(frozen=True)
class BudgetPoint:
    epsilon: float
    poison: PoisonReport
    poisoned: TrainSummary
    defended: TrainSummary


def with_value(config: TrainConfig, key: str, value: float) -> TrainConfig:
    """
    Copy of config with one dotted key replaced and the result re-validated.

    Raises:
        ConfigurationError: If key is not one of ABLATION_KEYS
        ValidationError: If the value is out of range for the key
    """
    if key not in ABLATION_KEYS:
        raise ConfigurationError(f"cannot sweep {key!r}; expected one of {list(ABLATION_KEYS)}")
    data = config.model_dump()
    *parents, leaf = key.split(".")
    node = data
    for parent in parents:
        node = node[parent]
    node[leaf] = value
    return TrainConfig.model_validate(data)


def ablation_sweep(
    bundle: DatasetBundle, base: TrainConfig, key: str, values: Sequence[float], seed: int
) -> list[AblationPoint]:
    """Train once per value of key, everything else fixed to base."""
    points = []
    for value in values:
        config = with_value(base, key, value)
        _, run_report = train(bundle, config, seed)
        summary = run_report.summary
        logger.info(f"{key}={value:g}: peak {summary.max_gaussian_count} splats, PSNR {summary.test_psnr:.2f} dB")
        points.append(AblationPoint(key=key, value=value, summary=summary))
    return points


def budget_sweep(
    clean: DatasetBundle,
    epsilons: Sequence[float],
    attack: AttackConfig,
    train_config: TrainConfig,
    seed: int,
) -> list[BudgetPoint]:
    """Poison clean at each budget, then train the poisoned and defended modes on the result."""
    poisoned_config = train_config.model_copy(update={"mode": TrainMode.POISONED})
    defended_config = train_config.model_copy(update={"mode": TrainMode.DEFENDED})
    points = []
    for epsilon in epsilons:
        poisoned_bundle = poison_images(clean, attack.model_copy(update={"epsilon": epsilon}))
        findings = poison_report(clean, poisoned_bundle)
        _, poisoned = train(poisoned_bundle, poisoned_config, seed)
        _, defended = train(poisoned_bundle, defended_config, seed)
        logger.info(
            f"eps={epsilon:.5f}: poisoned peak {poisoned.summary.max_gaussian_count}, "
            f"defended peak {defended.summary.max_gaussian_count}"
        )
        points.append(
            BudgetPoint(epsilon=epsilon, poison=findings, poisoned=poisoned.summary, defended=defended.summary)
        )
    return points
