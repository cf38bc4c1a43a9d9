"""Resource-targeting poisoning surrogate: projected sign-gradient ascent on total variation.

Each training image is sharpened inside an L-infinity ball around the original; test images
are left untouched. By default the ascent direction is pooled over screen-aligned bands a few
pixels wide, so the perturbation becomes directional banding at mid frequencies rather than
per-pixel noise. Results are snapped to the 8-bit grid without leaving the ball, so a
persisted poisoned bundle obeys the same bound as the in-memory one.

NO try-catch blocks - let exceptions bubble up.
"""

import logging
from collections.abc import Sequence

import numpy as np

from gsdefend.core.errors import DimensionMismatchError
from gsdefend.core.models import AttackConfig, PoisonImageRecord, PoisonReport, SpectralConfig
from gsdefend.core.parallel import ordered_map
from gsdefend.render.losses import loss_tv
from gsdefend.render.metrics import metric_psnr
from gsdefend.scene.types import DatasetBundle, ImageBuffer, require_same_shape
from gsdefend.spectral.regularizer import anisotropy_loss

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

GRID = 255.0
BAND_AXES = ("columns", "rows")


def _quantize_in_ball(x: np.ndarray, x0: np.ndarray, epsilon: float | None) -> np.ndarray:
    """Round to the 8-bit grid; inside the ball when a grid point exists there, else keep x."""
    q = np.round(x * GRID) / GRID
    if epsilon is not None:
        lo = np.ceil((x0 - epsilon) * GRID - 1e-9) / GRID
        hi = np.floor((x0 + epsilon) * GRID + 1e-9) / GRID
        q = np.where(lo <= hi, np.clip(q, lo, hi), x)
    return np.clip(q, 0.0, 1.0)


def _spread(profile: np.ndarray, shape: tuple[int, ...], axis: str) -> np.ndarray:
    grid = profile[None, :, None] if axis == "columns" else profile[:, None, None]
    return np.broadcast_to(grid, shape).copy()


def _band_length(shape: tuple[int, ...], axis: str) -> int:
    return shape[1] if axis == "columns" else shape[0]


def pool_bands(grad: np.ndarray, width: int, axis: str) -> np.ndarray:
    """
    Sum a per-pixel gradient over each band and broadcast the sums back.

    Column bands span the full height and `width` columns; row bands are the transpose.
    Channels are pooled too, so every pixel of a band moves together.
    """
    profile = grad.sum(axis=(0, 2)) if axis == "columns" else grad.sum(axis=(1, 2))
    starts = np.arange(0, profile.shape[0], width)
    pooled = np.repeat(np.add.reduceat(profile, starts), width)[: profile.shape[0]]
    return _spread(pooled, grad.shape, axis)


def _random_start(shape: tuple[int, ...], config: AttackConfig, axis: str, rng: np.random.Generator) -> np.ndarray:
    """Uniform offsets in [-epsilon, epsilon], one per pixel or one per band."""
    if config.band_width is None:
        return rng.uniform(-1.0, 1.0, shape) * config.epsilon
    length = _band_length(shape, axis)
    n_bands = -(-length // config.band_width)
    per_band = rng.uniform(-1.0, 1.0, n_bands) * config.epsilon
    return _spread(np.repeat(per_band, config.band_width)[:length], shape, axis)


def _band_axis(config: AttackConfig, rng: np.random.Generator) -> str:
    if config.band_axis == "random":
        return BAND_AXES[int(rng.integers(len(BAND_AXES)))]
    return config.band_axis


def attack_image(image: ImageBuffer, config: AttackConfig, seed: int | np.random.SeedSequence = 0) -> ImageBuffer:
    """
    Run the fixed number of TV-ascent steps on one image.

    Args:
        seed: Drives the random start and the band orientation
    """
    x0 = image.pixels
    epsilon = None if config.unconstrained else config.epsilon
    if epsilon == 0:
        return ImageBuffer(x0.copy())

    rng = np.random.default_rng(seed)
    axis = _band_axis(config, rng)
    step = config.effective_step_size
    x = x0.copy()
    if config.random_start:
        x = np.clip(x0 + _random_start(x0.shape, config, axis, rng), 0.0, 1.0)
    for _ in range(config.steps):
        _, grad = loss_tv(ImageBuffer(x))
        if config.band_width is not None:
            grad = pool_bands(grad, config.band_width, axis)
        x = x + step * np.sign(grad)
        if epsilon is not None:
            x = np.clip(x, x0 - epsilon, x0 + epsilon)
        x = np.clip(x, 0.0, 1.0)
    return ImageBuffer(_quantize_in_ball(x, x0, epsilon))


def poison_images(bundle: DatasetBundle, config: AttackConfig) -> DatasetBundle:
    """
    Poison every training image of a bundle.

    Args:
        bundle: Clean bundle
        config: Attack budget, step count and step size

    Returns:
        New bundle with poisoned training images, the same test views and kind="poisoned"
    """
    logger.info(
        f"Poisoning {len(bundle.train_views)} images: eps={config.epsilon:.5f} steps={config.steps} "
        f"step={config.effective_step_size:.5f} bands={config.band_width}/{config.band_axis} "
        f"unconstrained={config.unconstrained}"
    )
    seeds = np.random.SeedSequence(bundle.metadata.seed).spawn(len(bundle.train_views))
    poisoned = ordered_map(lambda item: attack_image(item[0], config, item[1]), list(zip(bundle.train_images, seeds)))
    metadata = bundle.metadata.model_copy(update={"kind": "poisoned", "attack": config})
    return bundle.with_train_images(poisoned, metadata)


def tv_ratio(before: float, after: float) -> float:
    """after / before; 1 when the two agree, including two flat images."""
    if after == before:
        return 1.0
    return after / max(before, 1e-12)


def poison_report(
    clean: DatasetBundle, poisoned: DatasetBundle, spectral: SpectralConfig | None = None
) -> PoisonReport:
    """
    Per-image TV ratio, L-infinity deviation, anisotropy delta and PSNR of poisoned vs clean.

    Raises:
        DimensionMismatchError: If the bundles' training sets do not align
    """
    spectral = spectral or SpectralConfig()
    if len(clean.train_views) != len(poisoned.train_views):
        raise DimensionMismatchError(
            f"clean bundle has {len(clean.train_views)} train views, poisoned has {len(poisoned.train_views)}"
        )

    def measure(index: int) -> PoisonImageRecord:
        before, after = clean.train_images[index], poisoned.train_images[index]
        require_same_shape(before, after)
        tv_before, _ = loss_tv(before)
        tv_after, _ = loss_tv(after)
        return PoisonImageRecord(
            index=index,
            tv_ratio=tv_ratio(tv_before, tv_after),
            linf=float(np.abs(after.pixels - before.pixels).max()),
            anisotropy_delta=anisotropy_loss(after, spectral)[0] - anisotropy_loss(before, spectral)[0],
            psnr=metric_psnr(before, after),
        )

    records = ordered_map(measure, range(len(clean.train_views)))
    return PoisonReport(seed=poisoned.metadata.seed, attack=poisoned.metadata.attack, images=records)


def attack_strength_sweep(
    bundle: DatasetBundle, epsilons: Sequence[float], base_config: AttackConfig | None = None
) -> list[tuple[float, PoisonReport]]:
    """Poison the same bundle at several budgets; step size follows each budget unless fixed in base_config."""
    base_config = base_config or AttackConfig()
    results = []
    for epsilon in epsilons:
        config = base_config.model_copy(update={"epsilon": epsilon})
        report = poison_report(bundle, poison_images(bundle, config))
        logger.info(f"eps={epsilon:.5f}: mean TV ratio {report.mean_tv_ratio:.3f}")
        results.append((epsilon, report))
    return results
