"""gsdefend - Gaussian-splatting training with a spectral defense against resource-targeting poisoning."""

__version__ = "1.0.0"

from gsdefend.core.config import config
from gsdefend.core.models import AttackConfig, SceneConfig, TrainConfig, TrainMode, TrainReport

__all__ = ["config", "AttackConfig", "SceneConfig", "TrainConfig", "TrainMode", "TrainReport", "__version__"]
