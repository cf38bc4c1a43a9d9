"""Score-based pruning: frequency-aware (W x hit) and the opacity x hit baseline, plus the UT gate."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from gsdefend.core.models import TrainConfig, TrainEvent, TrainMode
from gsdefend.render.rasterizer import count_hits
from gsdefend.scene.types import Camera, GaussianCloud
from gsdefend.spectral.filter3d import hf_importance_cloud

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


@dataclass(eq=False)
class PruneResult:
    cloud: GaussianCloud
    keep: np.ndarray
    event: TrainEvent


def prune_scores(cloud: GaussianCloud, hit_counts: np.ndarray, config: TrainConfig) -> np.ndarray:
    """W(G) x hit(G) in defended mode; opacity x hit(G) for the score baseline."""
    if config.mode == TrainMode.BASELINE_SCORE:
        return cloud.opacities * hit_counts
    return hf_importance_cloud(cloud, config.freq_filter) * hit_counts


def frequency_prune(
    cloud: GaussianCloud, hit_counts: np.ndarray, config: TrainConfig, iteration: int = 0
) -> PruneResult:
    """
    Remove the floor(prune_ratio x count) lowest-scoring splats.

    Ties are broken by hit count (more hits survive) and then by index (lower index goes first).
    The event is skipped when nothing would be removed or the cloud would fall below min_splats.
    """
    n = len(cloud)
    k = int(np.floor(config.prune_ratio * n))
    everything = np.arange(n)

    if k == 0 or n - k < config.min_splats:
        reason = "prune count is zero" if k == 0 else f"would drop below {config.min_splats} splats"
        logger.info(f"iter {iteration}: prune skipped ({reason})")
        event = TrainEvent(iteration=iteration, kind="prune", skipped=True, detail=reason)
        return PruneResult(cloud=cloud, keep=everything, event=event)

    scores = prune_scores(cloud, hit_counts, config)
    order = np.lexsort((everything, hit_counts, scores))
    keep = np.sort(order[k:])
    logger.info(f"iter {iteration}: pruned {k} of {n} splats")
    event = TrainEvent(iteration=iteration, kind="prune", removed=k)
    return PruneResult(cloud=cloud.select(keep), keep=keep, event=event)


def sample_hit_counts(
    cloud: GaussianCloud,
    cameras: Sequence[Camera],
    view_samples: int,
    rng: np.random.Generator,
    background: Sequence[float] = (0.0, 0.0, 0.0),
) -> np.ndarray:
    """hit(G) summed over min(view_samples, len(cameras)) views drawn without replacement."""
    k = min(view_samples, len(cameras))
    chosen = np.sort(rng.choice(len(cameras), size=k, replace=False))
    return count_hits(cloud, [cameras[i] for i in chosen], background)


def growth_allowed(count: int, ut_cap: int | None) -> bool:
    """Universal-threshold gate: densification stops once the count exceeds the cap."""
    return ut_cap is None or count <= ut_cap
