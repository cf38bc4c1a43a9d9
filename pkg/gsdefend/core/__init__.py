"""Core plumbing for gsdefend: settings, schemas, errors."""

from gsdefend.core.config import config
from gsdefend.core.models import AttackConfig, SceneConfig, TrainConfig, TrainMode, TrainReport

__all__ = ["config", "AttackConfig", "SceneConfig", "TrainConfig", "TrainMode", "TrainReport"]
