"""Closed-form Fourier response of 3D Gaussians and the frequency-aware importance weight.

For G(x) = exp(-1/2 (x - mu)^T Sigma^-1 (x - mu)) the continuous transform is
amplitude (2 pi)^(3/2) |Sigma|^(1/2) exp(-2 pi^2 t^T Sigma t) and phase -2 pi t^T mu.
Frequencies are in cycles per scene unit.
"""

import numpy as np

from gsdefend.core.errors import InvalidParameterError
from gsdefend.core.models import FreqFilterConfig
from gsdefend.scene.geometry import min_sigma, min_sigmas
from gsdefend.scene.types import GaussianCloud, GaussianSplat

SCORE_FLOOR = 1e-300


def gaussian_amplitude(sigma: np.ndarray, t_vec: np.ndarray) -> float:
    """
    Fourier amplitude of an unnormalized 3D Gaussian with covariance sigma at frequency t_vec.

    Raises:
        InvalidParameterError: If sigma is not symmetric positive definite
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    t_vec = np.asarray(t_vec, dtype=np.float64)
    if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12) or np.linalg.eigvalsh(sigma).min() <= 0:
        raise InvalidParameterError("covariance must be symmetric positive definite")
    return float((2 * np.pi) ** 1.5 * np.sqrt(np.linalg.det(sigma)) * np.exp(-2 * np.pi**2 * t_vec @ sigma @ t_vec))


def gaussian_phase(mu: np.ndarray, t_vec: np.ndarray) -> float:
    return float(-2 * np.pi * np.dot(mu, t_vec))


def _attenuation(sigma_min: np.ndarray | float, t_ref: float) -> np.ndarray:
    return np.maximum(np.exp(-2 * np.pi**2 * t_ref**2 * np.square(sigma_min)), SCORE_FLOOR)


def hf_attenuation_score(splat: GaussianSplat, t_ref: float) -> float:
    """Amplitude ratio exp(-2 pi^2 t^2 sigma_min^2) along the narrowest axis; in (0, 1]."""
    if t_ref <= 0:
        raise InvalidParameterError(f"t_ref must be positive, got {t_ref}")
    return float(_attenuation(min_sigma(splat), t_ref))


def hf_importance(splat: GaussianSplat, config: FreqFilterConfig) -> float:
    """(1 - S)^alpha: near zero for needle-thin splats with a strong high-frequency response."""
    return float((1.0 - hf_attenuation_score(splat, config.t_ref)) ** config.alpha)


def hf_importance_cloud(cloud: GaussianCloud, config: FreqFilterConfig) -> np.ndarray:
    """Vectorized hf_importance over a whole cloud."""
    return (1.0 - _attenuation(min_sigmas(cloud), config.t_ref)) ** config.alpha
