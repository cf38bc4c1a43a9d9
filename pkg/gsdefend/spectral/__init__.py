"""Spectral analysis: 3D splat frequency scores and 2D image anisotropy."""

from gsdefend.spectral.analysis import (
    AngularHistogram,
    BandMask,
    Spectrum,
    angular_histogram,
    band_mask,
    dft2,
    normalize_amplitude,
    paired_bins,
    radial_energy_profile,
    spectrum_heatmap,
)
from gsdefend.spectral.filter3d import (
    gaussian_amplitude,
    gaussian_phase,
    hf_attenuation_score,
    hf_importance,
    hf_importance_cloud,
)
from gsdefend.spectral.regularizer import anisotropy_loss, freq_regularizer, mean_anisotropy

__all__ = [
    "AngularHistogram",
    "BandMask",
    "Spectrum",
    "angular_histogram",
    "anisotropy_loss",
    "band_mask",
    "dft2",
    "freq_regularizer",
    "gaussian_amplitude",
    "gaussian_phase",
    "hf_attenuation_score",
    "hf_importance",
    "hf_importance_cloud",
    "mean_anisotropy",
    "normalize_amplitude",
    "paired_bins",
    "radial_energy_profile",
    "spectrum_heatmap",
]
