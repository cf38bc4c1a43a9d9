"""Training objective: reconstruction (L1 + D-SSIM) plus the weighted spectral and TV regularizers.

    L = mean_v[(1 - lambda_ssim) L1 + lambda_ssim D-SSIM] + lambda_freq (L_freq + L_tv)

L_freq and L_tv are view means as well. Their values are always reported; their gradients
only flow when the effective lambda_freq is positive. The weight is scaled by
width / reference_width because total variation shrinks with resolution.
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from gsdefend.core.errors import DimensionMismatchError
from gsdefend.core.models import TrainConfig
from gsdefend.render.losses import loss_dssim, loss_l1, loss_tv
from gsdefend.scene.types import ImageBuffer
from gsdefend.spectral.regularizer import anisotropy_loss


@dataclass(frozen=True)
class LossBreakdown:
    recon: float
    freq: float
    tv: float
    lambda_freq: float

    @property
    def weighted_terms(self) -> tuple[float, float, float]:
        return self.recon, self.lambda_freq * self.freq, self.lambda_freq * self.tv

    @property
    def total(self) -> float:
        return float(sum(self.weighted_terms))


def total_loss(
    renders: Sequence[ImageBuffer], targets: Sequence[ImageBuffer], config: TrainConfig
) -> tuple[float, LossBreakdown, list[np.ndarray]]:
    """
    Combined loss over a minibatch of views.

    Returns:
        (total, breakdown, per-render gradient images)

    Raises:
        DimensionMismatchError: If renders and targets differ in number or shape
    """
    if len(renders) != len(targets) or not renders:
        raise DimensionMismatchError(f"{len(renders)} renders for {len(targets)} targets")

    k = len(renders)
    lam_ssim = config.lambda_ssim
    lam_freq = config.lambda_freq_at(renders[0].width)
    recon = freq = tv = 0.0
    grads = []
    for render, target in zip(renders, targets):
        l1, g_l1 = loss_l1(render, target)
        dssim, g_dssim = loss_dssim(render, target)
        ani, g_ani = anisotropy_loss(render, config.spectral)
        tv_value, g_tv = loss_tv(render)

        recon += ((1 - lam_ssim) * l1 + lam_ssim * dssim) / k
        freq += ani / k
        tv += tv_value / k

        grad = ((1 - lam_ssim) * g_l1 + lam_ssim * g_dssim) / k
        if lam_freq > 0:
            grad = grad + lam_freq * (g_ani + g_tv) / k
        grads.append(grad)

    breakdown = LossBreakdown(recon=recon, freq=freq, tv=tv, lambda_freq=lam_freq)
    return breakdown.total, breakdown, grads
