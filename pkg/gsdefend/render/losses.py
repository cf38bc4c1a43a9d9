"""Image losses with analytic gradients w.r.t. the first argument.

Every loss returns ``(value, gradient)`` where the gradient is an H x W x 3 array.
"""

import numpy as np
from scipy.ndimage import correlate1d
from scipy.signal.windows import gaussian

from gsdefend.core.errors import InvalidParameterError
from gsdefend.scene.types import ImageBuffer, require_same_shape

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2

_KERNEL = gaussian(SSIM_WINDOW, SSIM_SIGMA)
_KERNEL = _KERNEL / _KERNEL.sum()


def _blur(x: np.ndarray) -> np.ndarray:
    """Separable Gaussian window, zero padded. Self-adjoint because the kernel is symmetric."""
    return correlate1d(correlate1d(x, _KERNEL, axis=0, mode="constant"), _KERNEL, axis=1, mode="constant")


def loss_l1(a: ImageBuffer, b: ImageBuffer) -> tuple[float, np.ndarray]:
    require_same_shape(a, b)
    diff = a.pixels - b.pixels
    return float(np.abs(diff).mean()), np.sign(diff) / diff.size


def _ssim_terms(a: np.ndarray, b: np.ndarray) -> dict[str, np.ndarray]:
    mu_a, mu_b = _blur(a), _blur(b)
    var_a = _blur(a * a) - mu_a**2
    var_b = _blur(b * b) - mu_b**2
    cov_ab = _blur(a * b) - mu_a * mu_b
    a1 = 2 * mu_a * mu_b + SSIM_C1
    a2 = 2 * cov_ab + SSIM_C2
    b1 = mu_a**2 + mu_b**2 + SSIM_C1
    b2 = var_a + var_b + SSIM_C2
    return {"mu_a": mu_a, "mu_b": mu_b, "a1": a1, "a2": a2, "b1": b1, "b2": b2, "map": a1 * a2 / (b1 * b2)}


def ssim_map(a: ImageBuffer, b: ImageBuffer) -> np.ndarray:
    """Per-pixel, per-channel SSIM (11-tap Gaussian window, sigma 1.5)."""
    require_same_shape(a, b)
    return _ssim_terms(a.pixels, b.pixels)["map"]


def loss_dssim(a: ImageBuffer, b: ImageBuffer) -> tuple[float, np.ndarray]:
    """(1 - mean SSIM) / 2 and its gradient w.r.t. a."""
    require_same_shape(a, b)
    x, y = a.pixels, b.pixels
    t = _ssim_terms(x, y)
    s, mu_a, mu_b = t["map"], t["mu_a"], t["mu_b"]
    denom = t["b1"] * t["b2"]

    d_mu = 2 * mu_b * t["a2"] / denom - 2 * mu_b * t["a1"] / denom - s * 2 * mu_a / t["b1"] + s * 2 * mu_a / t["b2"]
    d_m2 = -s / t["b2"]
    d_mab = 2 * t["a1"] / denom

    upstream = -0.5 / s.size
    grad = upstream * (_blur(d_mu) + 2 * x * _blur(d_m2) + y * _blur(d_mab))
    return float((1.0 - s.mean()) / 2.0), grad


def loss_tv(img: ImageBuffer) -> tuple[float, np.ndarray]:
    """
    Anisotropic total variation: mean |horizontal diff| + mean |vertical diff| over all channels.

    Raises:
        InvalidParameterError: If the image is narrower or shorter than 2 pixels
    """
    if img.height < 2 or img.width < 2:
        raise InvalidParameterError(f"total variation needs at least 2x2 pixels, got {img.height}x{img.width}")
    x = img.pixels
    dx = x[:, 1:] - x[:, :-1]
    dy = x[1:, :] - x[:-1, :]

    grad = np.zeros_like(x)
    sx = np.sign(dx) / dx.size
    sy = np.sign(dy) / dy.size
    grad[:, 1:] += sx
    grad[:, :-1] -= sx
    grad[1:, :] += sy
    grad[:-1, :] -= sy
    return float(np.abs(dx).mean() + np.abs(dy).mean()), grad
