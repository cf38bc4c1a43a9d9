"""Adaptive densification: clone small high-gradient splats, split large ones, drop transparent ones."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from gsdefend.core.models import TrainConfig, TrainEvent
from gsdefend.scene.geometry import quaternion_to_rotation
from gsdefend.scene.types import GaussianCloud

logger = logging.getLogger(__name__)

SPLIT_CHILDREN = 2


@dataclass
class DensifyStats:
    """Accumulated view-space positional gradient norms per splat."""

    grad_sum: np.ndarray
    views: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "DensifyStats":
        return cls(np.zeros(n), np.zeros(n, dtype=np.int64))

    def add(self, d_mean2d: np.ndarray, visible: np.ndarray) -> None:
        self.grad_sum[visible] += np.linalg.norm(d_mean2d[visible], axis=1)
        self.views[visible] += 1

    def select(self, keep: np.ndarray) -> "DensifyStats":
        return DensifyStats(self.grad_sum[keep], self.views[keep])

    def mean(self) -> np.ndarray:
        return np.divide(self.grad_sum, self.views, out=np.zeros_like(self.grad_sum), where=self.views > 0)


@dataclass(eq=False)
class DensifyResult:
    cloud: GaussianCloud
    source: np.ndarray  # row in the old cloud each new row derives from
    fresh: np.ndarray  # rows created by this event
    event: TrainEvent


def _split_children(cloud: GaussianCloud, parents: np.ndarray, split_factor: float, rng: np.random.Generator):
    repeated = np.repeat(parents, SPLIT_CHILDREN)
    children = cloud.select(repeated)
    offsets = rng.normal(0.0, 1.0, (len(repeated), 3)) * cloud.scales[repeated]
    rotations = quaternion_to_rotation(cloud.rotations[repeated])
    children.positions = cloud.positions[repeated] + np.einsum("nij,nj->ni", rotations, offsets)
    children.log_scales = cloud.log_scales[repeated] - np.log(split_factor)
    return children, repeated


def densify_and_prune(
    cloud: GaussianCloud,
    mean_grads: np.ndarray,
    config: TrainConfig,
    iteration: int,
    extent: float,
    rng: np.random.Generator,
    allow_growth: bool = True,
    threshold: float | None = None,
) -> DensifyResult:
    """
    One densification event.

    Splats whose mean view-space gradient exceeds the threshold are cloned when their largest
    scale is at most percent_dense x extent, otherwise split into two children with scales
    divided by split_factor and positions drawn from the parent Gaussian. Afterwards splats
    below the opacity threshold are removed, unless that would leave fewer than min_splats.

    Args:
        mean_grads: Per-splat mean gradient norm, aligned with cloud
        allow_growth: False disables clone/split (universal-threshold baseline)
        threshold: Gradient threshold, defaults to config.densify_grad_threshold
    """
    n = len(cloud)
    indices = np.arange(n)
    threshold = config.densify_grad_threshold if threshold is None else threshold
    hot = mean_grads > threshold if allow_growth else np.zeros(n, dtype=bool)
    large = cloud.scales.max(axis=1) > config.percent_dense * extent
    clone_idx = indices[hot & ~large]
    split_idx = indices[hot & large]

    survivors = indices[~(hot & large)]
    clones = cloud.select(clone_idx)
    children, child_src = _split_children(cloud, split_idx, config.split_factor, rng)
    grown = cloud.select(survivors).concat(clones).concat(children)
    grown.creation_iteration[len(survivors) :] = iteration
    source = np.concatenate([survivors, clone_idx, child_src])
    fresh = np.arange(len(grown)) >= len(survivors)

    opaque = expit(grown.opacity_logits) >= config.opacity_prune_threshold
    detail = ""
    if opaque.sum() < config.min_splats:
        opaque[:] = True
        detail = "opacity prune skipped: would drop below min_splats"
    result_cloud = grown.select(opaque)

    added = len(clone_idx) + len(child_src)
    removed = len(split_idx) + int((~opaque).sum())
    event = TrainEvent(iteration=iteration, kind="densify", added=added, removed=removed, detail=detail)
    logger.debug(
        f"iter {iteration}: cloned {len(clone_idx)}, split {len(split_idx)}, "
        f"opacity-pruned {int((~opaque).sum())} -> {len(result_cloud)} splats"
    )
    return DensifyResult(cloud=result_cloud, source=source[opaque], fresh=fresh[opaque], event=event)
