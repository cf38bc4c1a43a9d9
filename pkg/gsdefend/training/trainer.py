"""Training loop: reconstruction with optional spectral regularization, densification and pruning.

Per iteration: render a minibatch of training views, evaluate the objective, backpropagate,
take one Adam step, then (at their intervals) densify and prune. Densification fires before
pruning when both land on the same iteration.

Randomness comes from independent streams spawned from the run seed (initialization, view
order, densification, prune view sampling), so toggling pruning leaves the other streams intact.

NO try-catch blocks - a non-finite loss raises TrainingDivergedError after dumping the view.
"""

import logging
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from gsdefend.core.config import config as settings
from gsdefend.core.errors import ConfigurationError, InvalidParameterError, TrainingDivergedError
from gsdefend.core.models import IterationRecord, TrainConfig, TrainEvent, TrainMode, TrainReport, TrainSummary
from gsdefend.core.parallel import ordered_map
from gsdefend.render.metrics import metric_fps, metric_psnr, metric_ssim, track_duration
from gsdefend.render.rasterizer import render, render_backward
from gsdefend.scene.io import save_image
from gsdefend.scene.synthetic import initial_cloud, sample_ground_truth, scene_extent
from gsdefend.scene.types import DatasetBundle, GaussianCloud, ImageBuffer
from gsdefend.training.densify import DensifyStats, densify_and_prune
from gsdefend.training.objective import total_loss
from gsdefend.training.optimizer import Adam, position_lr
from gsdefend.training.pruning import frequency_prune, growth_allowed, sample_hit_counts

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

LOG_EVERY = 100


def smooth_targets(images: list[ImageBuffer], sigma: float) -> list[ImageBuffer]:
    """Gaussian-blurred copies of the targets (image-smoothing baseline)."""
    return [ImageBuffer(gaussian_filter(image.pixels, sigma=(sigma, sigma, 0.0))) for image in images]


def default_initial_cloud(bundle: DatasetBundle, config: TrainConfig, seed: np.random.SeedSequence) -> GaussianCloud:
    """
    Downsampled, jittered ground truth rebuilt from the bundle's scene descriptor.

    Raises:
        ConfigurationError: If the bundle carries no scene descriptor
    """
    scene = bundle.metadata.scene
    if scene is None:
        raise ConfigurationError("bundle has no scene descriptor; pass an initial cloud explicitly")
    ground_truth = sample_ground_truth(np.random.default_rng(bundle.metadata.seed), scene)
    return initial_cloud(ground_truth, config.init_fraction, config.init_jitter, seed)


class _ViewSchedule:
    """Epoch-wise shuffled view order."""

    def __init__(self, n_views: int, rng: np.random.Generator):
        self.n_views = n_views
        self.rng = rng
        self.queue: list[int] = []

    def take(self, k: int) -> list[int]:
        taken = []
        for _ in range(k):
            if not self.queue:
                self.queue = self.rng.permutation(self.n_views).tolist()
            taken.append(self.queue.pop(0))
        return taken


def _dump_view(render_image: ImageBuffer, iteration: int, view: int, dump_dir: Path | None) -> Path:
    directory = Path(dump_dir or settings.dump_dir or ".")
    path = directory / f"diverged_iter{iteration:05d}_view{view:03d}.png"
    save_image(render_image, path)
    return path


def train(
    bundle: DatasetBundle,
    config: TrainConfig,
    seed: int,
    initial: GaussianCloud | None = None,
    dump_dir: Path | None = None,
) -> tuple[GaussianCloud, TrainReport]:
    """
    Train a cloud on the bundle's training views.

    Args:
        bundle: Training and test views; test views are used for the final summary
        config: Loop, objective, densification, pruning and mode settings
        seed: Run seed
        initial: Start cloud; rebuilt from the bundle's scene descriptor when None
        dump_dir: Where a diverged view is saved (falls back to the global dump_dir setting)

    Returns:
        (trained cloud, report)

    Raises:
        InvalidParameterError: If the bundle has no training views
        TrainingDivergedError: If the loss becomes non-finite
    """
    if not bundle.train_views:
        raise InvalidParameterError("training needs at least one train view")

    init_seq, view_seq, densify_seq, prune_seq = np.random.SeedSequence(seed).spawn(4)
    cloud = (initial if initial is not None else default_initial_cloud(bundle, config, init_seq)).copy()
    cameras = bundle.train_cameras
    targets = bundle.train_images
    if config.mode == TrainMode.BASELINE_SMOOTH:
        targets = smooth_targets(targets, config.smooth_sigma)

    schedule = _ViewSchedule(len(cameras), np.random.default_rng(view_seq))
    densify_rng = np.random.default_rng(densify_seq)
    prune_rng = np.random.default_rng(prune_seq)
    batch = min(config.views_per_iteration, len(cameras))
    extent = scene_extent(cameras)
    grad_threshold = config.densify_threshold_at(cameras[0].width)
    ut_cap = config.ut_cap if config.mode == TrainMode.BASELINE_UT else None
    background = config.background

    optimizer = Adam.from_config(cloud, config)
    stats = DensifyStats.zeros(len(cloud))
    records: list[IterationRecord] = []
    events: list[TrainEvent] = []
    max_count = len(cloud)

    logger.info(
        f"Training mode={config.mode.value} seed={seed}: {len(cloud)} initial splats, "
        f"{len(cameras)} views, {config.iterations} iterations, densify threshold {grad_threshold:.2e}"
    )

    with track_duration(f"train {config.mode.value}") as timer:
        for iteration in range(1, config.iterations + 1):
            count = len(cloud)
            optimizer.learning_rates["positions"] = position_lr(config, iteration)

            views = schedule.take(batch)
            outputs = ordered_map(lambda v: render(cloud, cameras[v], background), views)
            renders = [out.image for out in outputs]
            loss, breakdown, image_grads = total_loss(renders, [targets[v] for v in views], config)
            if not np.isfinite(loss):
                path = _dump_view(renders[0], iteration, views[0], dump_dir)
                raise TrainingDivergedError(
                    f"non-finite loss at iteration {iteration}, view {views[0]}", view_index=views[0], dump_path=str(path)
                )

            per_view = ordered_map(
                lambda item: render_backward(cloud, cameras[item[0]], item[1], output=item[2], background=background),
                list(zip(views, image_grads, outputs)),
            )
            grads = per_view[0]
            for extra in per_view[1:]:
                grads = grads + extra
            optimizer.step(cloud, grads)
            cloud.normalize_rotations()
            np.clip(cloud.colors, 0.0, 1.0, out=cloud.colors)

            for out, view_grads in zip(outputs, per_view):
                stats.add(view_grads.d_mean2d, out.per_splat_hits > 0)

            added = removed = pruned = 0
            if iteration <= config.densify_until and iteration % config.densify_interval == 0:
                result = densify_and_prune(
                    cloud,
                    stats.mean(),
                    config,
                    iteration,
                    extent,
                    densify_rng,
                    growth_allowed(len(cloud), ut_cap),
                    threshold=grad_threshold,
                )
                cloud = result.cloud
                optimizer.remap(result.source, result.fresh)
                stats = DensifyStats.zeros(len(cloud))
                events.append(result.event)
                added, removed = result.event.added, result.event.removed

            if config.prunes_by_score and iteration % config.prune_interval == 0 and iteration >= config.prune_warmup:
                hits = sample_hit_counts(cloud, cameras, config.view_samples, prune_rng, background)
                pruning = frequency_prune(cloud, hits, config, iteration)
                cloud = pruning.cloud
                optimizer.select(pruning.keep)
                stats = stats.select(pruning.keep)
                events.append(pruning.event)
                pruned = pruning.event.removed

            records.append(
                IterationRecord(
                    iteration=iteration,
                    gaussian_count=count,
                    loss_total=loss,
                    loss_recon=breakdown.recon,
                    loss_freq=breakdown.freq,
                    loss_tv=breakdown.tv,
                    densify_added=added,
                    densify_removed=removed,
                    freq_pruned=pruned,
                )
            )
            max_count = max(max_count, len(cloud))
            if iteration % LOG_EVERY == 0:
                logger.info(f"iter {iteration}: loss={loss:.5f} splats={len(cloud)}")

    summary = _summarize(cloud, bundle, config, max_count, timer.seconds)
    logger.info(
        f"Finished mode={config.mode.value}: max {summary.max_gaussian_count} splats, "
        f"PSNR {summary.test_psnr:.2f} dB, {summary.wall_time_sec:.1f}s"
    )
    report = TrainReport(mode=config.mode, seed=seed, config=config, iterations=records, events=events, summary=summary)
    return cloud, report


def _summarize(
    cloud: GaussianCloud, bundle: DatasetBundle, config: TrainConfig, max_count: int, wall_time: float
) -> TrainSummary:
    views = bundle.test_views or bundle.train_views
    renders = ordered_map(lambda view: render(cloud, view[0], config.background).image, views)
    psnr = float(np.mean([metric_psnr(r, target) for r, (_, target) in zip(renders, views)]))
    ssim = float(np.mean([metric_ssim(r, target) for r, (_, target) in zip(renders, views)]))
    return TrainSummary(
        max_gaussian_count=max_count,
        final_gaussian_count=len(cloud),
        wall_time_sec=wall_time,
        test_psnr=psnr,
        test_ssim=ssim,
        fps=metric_fps(cloud, [camera for camera, _ in views], config.fps_repeats, config.background),
    )

