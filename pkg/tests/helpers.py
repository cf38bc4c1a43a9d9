"""Numerical helpers shared by the gradient and oracle tests."""

from collections.abc import Callable

import numpy as np
from scipy.special import logit

from gsdefend.scene.geometry import random_quaternions
from gsdefend.scene.types import GaussianCloud

STEP = 1e-4


def central_difference(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = STEP) -> np.ndarray:
    """
    Numerical gradient of a scalar function by central differences.

    x is perturbed in place one element at a time and restored afterwards.
    """
    grad = np.zeros_like(x, dtype=np.float64)
    for idx in np.ndindex(x.shape):
        original = x[idx]
        x[idx] = original + h
        f_plus = f(x)
        x[idx] = original - h
        f_minus = f(x)
        x[idx] = original
        grad[idx] = (f_plus - f_minus) / (2 * h)
    return grad


def assert_gradient_matches(analytic: np.ndarray, numeric: np.ndarray, rel: float = 1e-2, atol: float = 1e-6) -> None:
    """
    Elementwise: within rel of the numeric value, or within atol.

    Components far below the gradient's overall magnitude are held to rel x 1e-2 of that
    magnitude, where central differences are dominated by truncation error.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = float(np.abs(numeric).max(initial=0.0))
    tolerance = np.maximum(np.maximum(rel * np.abs(numeric), atol), rel * 1e-2 * scale)
    error = np.abs(analytic - numeric)
    worst = np.unravel_index(np.argmax(error - tolerance), error.shape) if error.size else ()
    assert (error <= tolerance).all(), (
        f"gradient mismatch at {worst}: analytic {analytic[worst]!r}, numeric {numeric[worst]!r}"
    )


def micro_cloud(rng: np.random.Generator, n: int, depth: float = 3.0) -> GaussianCloud:
    """
    A few mid-opacity splats in front of a camera at the origin looking down +z.

    Opacities stay in [0.2, 0.8] so no weight reaches the clamp and transmittance
    never falls below the termination threshold.
    """
    positions = np.column_stack(
        [rng.uniform(-0.3, 0.3, n), rng.uniform(-0.3, 0.3, n), rng.uniform(depth - 0.5, depth + 0.5, n)]
    )
    return GaussianCloud(
        positions=positions,
        log_scales=rng.uniform(np.log(0.1), np.log(0.25), (n, 3)),
        rotations=random_quaternions(rng, n),
        colors=rng.uniform(0.0, 1.0, (n, 3)),
        opacity_logits=logit(rng.uniform(0.2, 0.8, n)),
    )
