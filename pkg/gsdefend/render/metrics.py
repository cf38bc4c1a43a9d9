"""Evaluation metrics: PSNR, SSIM and rendering throughput.

NO try-catch blocks - let exceptions bubble up.
"""

import logging
import statistics
import time
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from gsdefend.core.errors import InvalidParameterError
from gsdefend.render.losses import ssim_map
from gsdefend.render.rasterizer import DEFAULT_SETTINGS, RasterSettings, render
from gsdefend.scene.types import Camera, GaussianCloud, ImageBuffer, require_same_shape

logger = logging.getLogger(__name__)

PSNR_CAP = 99.0
FPS_RUNS = 3


@dataclass
class Stopwatch:
    seconds: float = 0.0


@contextmanager
def track_duration(label: str) -> Iterator[Stopwatch]:
    """
    Context manager measuring wall time of a block.

    Example:
        with track_duration("train") as timer:
            ...
        timer.seconds
    """
    watch = Stopwatch()
    start = time.perf_counter()
    yield watch
    watch.seconds = time.perf_counter() - start
    logger.debug(f"{label}: {watch.seconds:.3f}s")


def metric_psnr(a: ImageBuffer, b: ImageBuffer) -> float:
    """10 log10(1 / MSE), capped at 99 dB for MSE < 1e-10."""
    require_same_shape(a, b)
    mse = float(np.mean((a.pixels - b.pixels) ** 2))
    if mse < 1e-10:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * np.log10(1.0 / mse))


def metric_ssim(a: ImageBuffer, b: ImageBuffer) -> float:
    return float(ssim_map(a, b).mean())


def metric_fps(
    cloud: GaussianCloud,
    cameras: Sequence[Camera],
    repeats: int = 3,
    background: Sequence[float] = (0.0, 0.0, 0.0),
    settings: RasterSettings = DEFAULT_SETTINGS,
) -> float:
    """
    Frames per second of the forward renderer: median over three timed runs of repeats x cameras renders.

    Raises:
        InvalidParameterError: If repeats < 3 or no cameras are given
    """
    if repeats < 3:
        raise InvalidParameterError(f"repeats must be >= 3, got {repeats}")
    if not cameras:
        raise InvalidParameterError("metric_fps needs at least one camera")

    rates = []
    for run in range(FPS_RUNS):
        with track_duration(f"fps run {run}") as timer:
            for _ in range(repeats):
                for camera in cameras:
                    render(cloud, camera, background, settings)
        rates.append(repeats * len(cameras) / max(timer.seconds, 1e-9))
    return statistics.median(rates)
