"""Angular-entropy anisotropy loss and its view-aggregated regularizer.

The loss is 1 - H(P) / log B, where P is the angular distribution of band-passed spectral
energy. Band selection and sector assignment are treated as constants in the backward pass.
"""

from collections.abc import Sequence

import numpy as np
from scipy import fft

from gsdefend.core.errors import InvalidParameterError
from gsdefend.core.models import SpectralConfig
from gsdefend.core.parallel import ordered_map
from gsdefend.scene.types import LUMA_WEIGHTS, ImageBuffer
from gsdefend.spectral.analysis import (
    AngularHistogram,
    BandMask,
    angular_bins,
    angular_histogram,
    band_mask,
    dft2,
    normalize_amplitude,
)


def histogram_entropy(hist: AngularHistogram) -> float:
    """Shannon entropy in nats with 0 log 0 = 0; 0 for an empty histogram."""
    probs = hist.probabilities
    nonzero = probs[probs > 0]
    return float(-(nonzero * np.log(nonzero)).sum())


def anisotropy_from_histogram(hist: AngularHistogram) -> float:
    if hist.empty:
        return 0.0
    return 1.0 - histogram_entropy(hist) / np.log(hist.bins)


def anisotropy_loss(
    img: ImageBuffer, config: SpectralConfig, mask: BandMask | None = None
) -> tuple[float, np.ndarray]:
    """
    Anisotropy of one image and its gradient w.r.t. the pixels.

    Args:
        img: Rendered image
        config: Band limits and bin count
        mask: Precomputed band mask; derived from the image when None

    Returns:
        (loss in [0, 1], H x W x 3 gradient); an empty histogram gives (0, zeros)
    """
    spec = dft2(img)
    if mask is None:
        mask = band_mask(normalize_amplitude(spec), config)
    hist = angular_histogram(spec, mask, config.bins, config.energy_floor)
    if hist.empty:
        return 0.0, np.zeros_like(img.pixels)

    entropy = histogram_entropy(hist)
    log_bins = np.log(config.bins)
    loss = 1.0 - entropy / log_bins

    probs = hist.probabilities
    log_probs = np.log(probs, out=np.zeros_like(probs), where=probs > 0)
    d_energy = (log_probs + entropy) / (hist.total * log_bins)

    sectors = angular_bins(spec.shape, config.bins)
    weights = np.where(mask.mask, d_energy[sectors], 0.0)
    unshifted = fft.ifftshift(spec.coeffs)
    d_lum = 2.0 * unshifted.size * np.real(fft.ifft2(fft.ifftshift(weights) * unshifted))
    return float(loss), d_lum[..., None] * LUMA_WEIGHTS


def mean_anisotropy(images: Sequence[ImageBuffer], config: SpectralConfig) -> float:
    """Mean anisotropy loss over images (0 for none)."""
    if not images:
        return 0.0
    values = ordered_map(lambda image: anisotropy_loss(image, config)[0], images)
    return float(np.mean(values))


def freq_regularizer(renders: Sequence[ImageBuffer], config: SpectralConfig) -> float:
    """
    Mean anisotropy loss over rendered views.

    Raises:
        InvalidParameterError: If renders is empty
    """
    if not renders:
        raise InvalidParameterError("freq_regularizer needs at least one render")
    return mean_anisotropy(renders, config)
