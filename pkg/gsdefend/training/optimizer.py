"""Adam over the five parameter groups of a GaussianCloud.

Moment buffers stay index-aligned with the cloud: pruning selects rows, densification
remaps rows and gives new splats zero moments.
"""

import numpy as np

from gsdefend.core.models import TrainConfig
from gsdefend.render.rasterizer import GradientBundle
from gsdefend.scene.types import GaussianCloud

PARAM_GROUPS = ("positions", "log_scales", "rotations", "colors", "opacity_logits")


def _gradient_of(grads: GradientBundle, group: str) -> np.ndarray:
    return {
        "positions": grads.d_position,
        "log_scales": grads.d_log_scales,
        "rotations": grads.d_rotation,
        "colors": grads.d_color,
        "opacity_logits": grads.d_opacity_logit,
    }[group]


class Adam:
    """Adam with per-group learning rates and a shared step counter."""

    def __init__(self, cloud: GaussianCloud, learning_rates: dict[str, float], beta1: float, beta2: float, eps: float):
        self.learning_rates = dict(learning_rates)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.first = {group: np.zeros_like(getattr(cloud, group)) for group in PARAM_GROUPS}
        self.second = {group: np.zeros_like(getattr(cloud, group)) for group in PARAM_GROUPS}

    @classmethod
    def from_config(cls, cloud: GaussianCloud, config: TrainConfig) -> "Adam":
        rates = {
            "positions": config.lr_position,
            "log_scales": config.lr_log_scales,
            "rotations": config.lr_rotation,
            "colors": config.lr_color,
            "opacity_logits": config.lr_opacity,
        }
        return cls(cloud, rates, config.adam_beta1, config.adam_beta2, config.adam_eps)

    def step(self, cloud: GaussianCloud, grads: GradientBundle) -> None:
        """Update cloud parameters in place."""
        self.step_count += 1
        bias1 = 1.0 - self.beta1**self.step_count
        bias2 = 1.0 - self.beta2**self.step_count
        for group in PARAM_GROUPS:
            grad = _gradient_of(grads, group)
            m, v = self.first[group], self.second[group]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            param = getattr(cloud, group)
            param -= self.learning_rates[group] * (m / bias1) / (np.sqrt(v / bias2) + self.eps)

    def select(self, keep: np.ndarray) -> None:
        for group in PARAM_GROUPS:
            self.first[group] = self.first[group][keep]
            self.second[group] = self.second[group][keep]

    def remap(self, source: np.ndarray, fresh: np.ndarray) -> None:
        """Row i of the new state copies row source[i]; rows flagged fresh start from zero."""
        for group in PARAM_GROUPS:
            for moments in (self.first, self.second):
                remapped = moments[group][source]
                remapped[fresh] = 0.0
                moments[group] = remapped


def position_lr(config: TrainConfig, iteration: int) -> float:
    """Log-linear decay from lr_position to lr_position_final over the run."""
    progress = min(max(iteration / config.iterations, 0.0), 1.0)
    return float(np.exp((1 - progress) * np.log(config.lr_position) + progress * np.log(config.lr_position_final)))
