"""Differentiable splat rendering, image losses and quality metrics."""

from gsdefend.render.losses import loss_dssim, loss_l1, loss_tv
from gsdefend.render.metrics import metric_fps, metric_psnr, metric_ssim
from gsdefend.render.rasterizer import (
    DEFAULT_SETTINGS,
    GradientBundle,
    Projected2D,
    RasterSettings,
    RenderOutput,
    count_hits,
    project,
    render,
    render_backward,
)

__all__ = [
    "DEFAULT_SETTINGS",
    "GradientBundle",
    "Projected2D",
    "RasterSettings",
    "RenderOutput",
    "count_hits",
    "loss_dssim",
    "loss_l1",
    "loss_tv",
    "metric_fps",
    "metric_psnr",
    "metric_ssim",
    "project",
    "render",
    "render_backward",
]
